// Acceptance gate: one line per criterion, nonzero exit if any fail.
// Self-contained against the default toolchain; no network backend involved.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ambigen/classifier.hpp"
#include "ambigen/config.hpp"
#include "ambigen/errors.hpp"
#include "ambigen/eval.hpp"
#include "ambigen/guidance.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/layout.hpp"
#include "ambigen/pipeline.hpp"
#include "ambigen/sha256.hpp"
#include "ambigen/svg.hpp"
#include "helpers.hpp"

using namespace ambigen;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// ---- criterion 1: score estimator against the Gaussian closed form ----

Outcome criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    Rng master(101);
    double worst = 0;
    for (int pair = 0; pair < 10; ++pair) {
        const int res = 16;
        Raster mu(res, res), x(res, res);
        for (double& v : mu.ink) v = master.uniform();
        for (double& v : x.ink) v = master.uniform();
        AnalyticGaussianBackend backend(mu, 1.0);
        ConditioningEmbedding c = backend.embed("closed form check");
        Raster est = paas(x, 1.0, c, backend, 10000, derive_seed(7, {uint64_t(pair)}));
        double num = 0, den = 0;
        for (size_t i = 0; i < x.ink.size(); ++i) {
            double expect = (mu.ink[i] - x.ink[i]) / 2.0;
            num += (est.ink[i] - expect) * (est.ink[i] - expect);
            den += expect * expect;
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    double dt = seconds_since(t0);
    bool pass = worst < 0.05 && dt < 30.0;
    return {pass, fmt("worst relative L2 error %.4f over 10 mean/point pairs in %.1fs", worst, dt)};
}

// ---- criterion 2: raster gradients against central differences ----

Outcome criterion2() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(42);
    RasterizeOptions opt;
    opt.resolution = 64;
    Raster weight(64, 64, 1.0);
    auto loss = [&](const Glyph& g) {
        Raster img = rasterize(g, opt).image;
        double L = 0;
        for (size_t i = 0; i < img.ink.size(); ++i) L += weight.ink[i] * img.ink[i];
        return L;
    };

    double worst = 0;
    for (int trial = 0; trial < 12; ++trial) {
        Glyph g = testutil::random_glyph(rng, trial % 2 == 1);
        RasterResult fwd = rasterize(g, opt);
        std::vector<double> an = rasterize_backward(*fwd.tape, weight);
        std::vector<double> flat = flatten_points(g);
        double gscale = 0;
        for (double v : an) gscale = std::max(gscale, std::fabs(v));

        const double h = 1e-3;
        for (size_t j = 0; j < flat.size(); ++j) {
            std::vector<double> fp = flat, fm = flat;
            fp[j] += h;
            fm[j] -= h;
            Glyph gp = g, gm = g;
            apply_points(gp, fp);
            apply_points(gm, fm);
            double fd = (loss(gp) - loss(gm)) / (2 * h);
            double rel = std::fabs(fd - an[j]) /
                         std::max({std::fabs(fd), std::fabs(an[j]), 1e-6 * gscale});
            worst = std::max(worst, rel);
        }
    }
    double dt = seconds_since(t0);
    bool pass = worst < 1e-2 && dt < 120.0;
    return {pass, fmt("worst per-coordinate relative error %.3e over 12 glyphs in %.1fs", worst, dt)};
}

// ---- criterion 3: rotation involution, svg round-trip, raster commutation ----

Outcome criterion3() {
    Rng rng(300);
    double worst_involution = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Glyph g = testutil::random_glyph(rng, trial % 3 == 0);
        std::vector<double> before = flatten_points(g);
        std::vector<double> after = flatten_points(rotate180(rotate180(g)));
        for (size_t i = 0; i < before.size(); ++i)
            worst_involution = std::max(worst_involution, std::fabs(after[i] - before[i]));
    }

    double worst_svg = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Glyph g = testutil::random_glyph(rng, trial % 2 == 0);
        Glyph back = from_svg(to_svg(g));
        std::vector<double> a = flatten_points(g), b = flatten_points(back);
        if (a.size() != b.size()) return {false, "svg round-trip changed the point count"};
        for (size_t i = 0; i < a.size(); ++i)
            worst_svg = std::max(worst_svg, std::fabs(a[i] - b[i]));
    }

    const FontFile& font = testutil::font();
    RasterizeOptions opt;
    opt.resolution = 64;
    double worst_mad = 0;
    for (char ch : {'O', 'S', 'N'}) {
        Glyph g = load_font_glyph(font, {ch, Case::Upper});
        Raster via_glyph = rasterize(rotate180(g), opt).image;
        Raster via_image = rotate180(rasterize(g, opt).image);
        double mad = 0;
        for (size_t i = 0; i < via_glyph.ink.size(); ++i)
            mad += std::fabs(via_glyph.ink[i] - via_image.ink[i]);
        mad /= double(via_glyph.ink.size());
        worst_mad = std::max(worst_mad, mad);
    }

    bool pass = worst_involution <= 1e-12 && worst_svg <= 1e-6 && worst_mad <= 2e-2;
    return {pass, fmt("involution %.2e, svg round-trip %.2e, raster rotation MAD %.4f",
                      worst_involution, worst_svg, worst_mad)};
}

// ---- criterion 4: alignment against exhaustive enumeration ----

Raster random_binary(int h, int w, double density, Rng& rng) {
    Raster img(h, w);
    for (double& v : img.ink) v = rng.uniform() < density ? 1.0 : 0.0;
    return img;
}

int overlap_at(const Raster& a, const Raster& b, int dx, int dy) {
    int count = 0;
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            if (b.at(y, x) <= 0.5) continue;
            int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= a.height || xx < 0 || xx >= a.width) continue;
            if (a.at(yy, xx) > 0.5) ++count;
        }
    return count;
}

Outcome criterion4() {
    Rng rng(400);
    for (int trial = 0; trial < 50; ++trial) {
        Raster a = random_binary(16, 16, 0.25, rng);
        Raster b = random_binary(16, 16, 0.25, rng);

        int best = -1;
        PixelShift arg{0, 0};
        for (int dy = -15; dy <= 15; ++dy)
            for (int dx = -15; dx <= 15; ++dx) {
                int c = overlap_at(a, b, dx, dy);
                if (c > best) {
                    best = c;
                    arg = {dx, dy};
                } else if (c == best) {
                    long cur = long(arg.dx) * arg.dx + long(arg.dy) * arg.dy;
                    long cand = long(dx) * dx + long(dy) * dy;
                    if (cand < cur ||
                        (cand == cur && (dx < arg.dx || (dx == arg.dx && dy < arg.dy))))
                        arg = {dx, dy};
                }
            }
        PixelShift got = alignment_shift(a, b, AlignmentScheme::MaxOverlap);
        if (got.dx != arg.dx || got.dy != arg.dy)
            return {false, fmt("max-overlap trial %d got (%d,%d), enumeration says (%d,%d)",
                               trial, got.dx, got.dy, arg.dx, arg.dy)};

        for (bool left : {true, false}) {
            int extreme = 0;
            bool found = false;
            for (int dx = -15; dx <= 15; ++dx) {
                if (overlap_at(a, b, dx, 0) == 0) continue;
                if (!found || (left ? dx < extreme : dx > extreme)) extreme = dx;
                found = true;
            }
            if (!found) continue;
            PixelShift shift = alignment_shift(
                a, b, left ? AlignmentScheme::ContactLeft : AlignmentScheme::ContactRight);
            long want = std::lround(0.7 * extreme);
            if (shift.dy != 0 || std::labs(shift.dx - want) > 1)
                return {false, fmt("contact trial %d got dx=%d, 0.7 of extreme %d is %ld",
                                   trial, shift.dx, extreme, want)};
        }
    }
    return {true, "max-overlap exact and contact within 1px of 0.7x extreme on 50 pairs"};
}

// ---- criterion 5: edit distance against an exhaustive oracle ----

int ref_distance(const std::string& s, const std::string& t) {
    std::vector<std::vector<int>> d(s.size() + 1, std::vector<int>(t.size() + 1, 0));
    for (size_t i = 0; i <= s.size(); ++i) d[i][0] = int(i);
    for (size_t j = 0; j <= t.size(); ++j) d[0][j] = int(j);
    for (size_t i = 1; i <= s.size(); ++i)
        for (size_t j = 1; j <= t.size(); ++j)
            d[i][j] = std::min({d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1),
                                d[i - 1][j] + 1, d[i][j - 1] + 1});
    return d[s.size()][t.size()];
}

Outcome criterion5() {
    std::vector<std::string> strings = {""};
    std::vector<std::string> frontier = {""};
    for (int len = 1; len <= 5; ++len) {
        std::vector<std::string> next;
        for (const std::string& s : frontier)
            for (char c : {'a', 'b'}) {
                next.push_back(s + c);
                strings.push_back(next.back());
            }
        frontier = std::move(next);
    }
    size_t pairs = 0;
    for (const std::string& s : strings)
        for (const std::string& t : strings) {
            if (edit_distance(s, t) != ref_distance(s, t))
                return {false, fmt("mismatch on \"%s\" vs \"%s\"", s.c_str(), t.c_str())};
            ++pairs;
        }

    Rng rng(1234);
    auto word = [&rng]() {
        size_t len = size_t(rng.uniform() * 9.0);
        std::string s;
        for (size_t i = 0; i < len; ++i) s.push_back(char('a' + int(rng.uniform() * 5)));
        return s;
    };
    for (int trial = 0; trial < 1000; ++trial) {
        std::string s = word(), t = word(), u = word();
        int st = edit_distance(s, t);
        bool ok = st >= 0 && st == edit_distance(t, s) && (st == 0) == (s == t) &&
                  edit_distance(s, u) <= st + edit_distance(t, u);
        if (!ok) return {false, fmt("metric axiom violated on trial %d", trial)};
    }
    return {true, fmt("%zu exhaustive pairs match, metric axioms hold on 1000 random triples",
                      pairs)};
}

// classifier cross-entropy of a postprocessed render, both orientations
double legibility_of(const LetterClassifier& clf, const Glyph& g, const CasedLetter& up,
                     const CasedLetter& down) {
    Raster r = postprocess(rasterize(g, {}).image);
    return clf.cross_entropy(r, LetterClassifier::class_index(up)) +
           clf.cross_entropy(rotate180(r), LetterClassifier::class_index(down));
}

// ---- criterion 6: letter designs halve the initialization loss ----

Outcome criterion6() {
    auto t0 = std::chrono::steady_clock::now();
    const FontFile& font = testutil::font();
    const LetterClassifier& clf = testutil::classifier();
    ClassifierBackend backend(clf);

    struct PairSpec {
        char a, b;
        CasePolicy policy;
    };
    const PairSpec pairs[5] = {{'O', 'O', CasePolicy::Upper},
                               {'S', 'S', CasePolicy::Upper},
                               {'N', 'N', CasePolicy::Upper},
                               {'H', 'H', CasePolicy::Upper},
                               {'B', 'Q', CasePolicy::Lower}};
    int passed = 0;
    size_t failures = 0;
    std::string per_pair;
    for (const PairSpec& p : pairs) {
        GridSpec grid;
        grid.lambdas = {0.3, 0.5, 0.7};
        grid.schemes = {AlignmentScheme::Naive, AlignmentScheme::MaxOverlap};
        grid.policy = p.policy;
        HyperParams base;
        base.seed = 17;
        GridResult res = grid_search(p.a, p.b, grid, font, base, backend, clf);
        failures += res.failures.size();
        if (res.candidates.empty()) {
            per_pair += fmt(" %c%c:all-cells-failed", p.a, p.b);
            continue;
        }
        const DesignCandidate& best = res.candidates.front();
        Glyph init = init_letter_pair(best.up, best.down, font, best.hyper.scheme);
        double init_ce = legibility_of(clf, init, best.up, best.down);
        bool ok = best.legibility <= 0.5 * init_ce;
        passed += ok;
        per_pair += fmt(" %c%c:%.3g<=0.5*%.3g%s", p.a, p.b, best.legibility, init_ce,
                        ok ? "" : "(FAIL)");
    }
    double dt = seconds_since(t0);
    bool pass = passed >= 4 && dt < 10800.0 && failures == 0;
    return {pass, fmt("%d/5 pairs halved their initialization loss in %.0fs:%s", passed, dt,
                      per_pair.c_str())};
}

// ---- criterion 7: word stage improves pair legibility within the leash ----

double word_pair_ce(const LetterClassifier& clf, const GlyphSequence& seq,
                    const AmbigramTask& task, const WordCases& wc) {
    size_t N = seq.glyphs.size();
    std::vector<Raster> imgs;
    for (const Glyph& g : seq.glyphs) imgs.push_back(postprocess(rasterize(g, {}).image));
    double total = 0;
    for (size_t n = 0; n + 1 < N; ++n) {
        double ce = 0;
        ce += clf.cross_entropy(imgs[n], LetterClassifier::class_index({task.word_a[n], wc.up[n]}));
        ce += clf.cross_entropy(imgs[n + 1],
                                LetterClassifier::class_index({task.word_a[n + 1], wc.up[n + 1]}));
        ce += clf.cross_entropy(
            rotate180(imgs[n + 1]),
            LetterClassifier::class_index({task.word_b[N - 2 - n], wc.down[N - 2 - n]}));
        ce += clf.cross_entropy(
            rotate180(imgs[n]),
            LetterClassifier::class_index({task.word_b[N - 1 - n], wc.down[N - 1 - n]}));
        total += ce;
    }
    return total / double(N - 1);
}

Outcome criterion7() {
    const FontFile& font = testutil::font();
    const LetterClassifier& clf = testutil::classifier();
    ClassifierBackend backend(clf);

    AmbigramTask task = make_task("OS", "SO", CasePolicy::Upper);
    HyperParams hp;
    hp.steps_letter = 120;
    hp.steps_word = 110;
    hp.seed = 21;
    hp.weights.word_reg = 1.0;

    std::vector<Glyph> letters;
    letters.push_back(optimize_letter({'O', Case::Upper}, {'O', Case::Upper}, font, hp, backend));
    letters.push_back(optimize_letter({'S', Case::Upper}, {'S', Case::Upper}, font, hp, backend));

    WordCases wc{{Case::Upper, Case::Upper}, {Case::Upper, Case::Upper}};
    GlyphSequence init = layout_word(letters);
    double ce0 = word_pair_ce(clf, init, task, wc);

    GlyphSequence out = optimize_word(task, letters, hp, backend, &wc);
    double ce1 = word_pair_ce(clf, out, task, wc);

    std::vector<double> p0 = flatten_points(init), p1 = flatten_points(out);
    double disp = 0;
    for (size_t i = 0; i < p0.size(); i += 2)
        disp += std::hypot(p1[i] - p0[i], p1[i + 1] - p0[i + 1]);
    disp /= double(p0.size() / 2);

    bool pass = ce1 <= ce0 && disp < 0.1;
    return {pass, fmt("pair loss %.4g -> %.4g after 110 word steps, mean displacement %.4f of the canvas",
                      ce0, ce1, disp)};
}

// ---- criterion 8: postprocess drops floaters and settles in one pass ----

Outcome criterion8() {
    Raster img(64, 64, 0.0);
    for (int y = 20; y < 40; ++y)
        for (int x = 24; x < 44; ++x) img.at(y, x) = 1.0;
    const int floaters[3][2] = {{3, 3}, {9, 52}, {55, 8}};
    for (auto& f : floaters) img.at(f[0], f[1]) = 1.0;
    Raster cleaned = postprocess(img);
    for (auto& f : floaters)
        if (cleaned.at(f[0], f[1]) != 0.0)
            return {false, fmt("floater at (%d,%d) survived", f[0], f[1])};
    if (cleaned.at(30, 34) != 1.0) return {false, "solid ink did not survive postprocessing"};

    const FontFile& font = testutil::font();
    double worst_changed = 0;
    for (char ch : {'O', 'B', 'W'}) {
        Glyph g = load_font_glyph(font, {ch, Case::Upper});
        RasterizeOptions opt;
        opt.resolution = 64;
        Raster bin = rasterize(g, opt).image;
        for (double& v : bin.ink) v = v > 0.5 ? 1.0 : 0.0;
        Raster once = postprocess(bin);
        Raster twice = postprocess(once);
        int changed = 0;
        for (size_t i = 0; i < once.ink.size(); ++i)
            if (std::fabs(once.ink[i] - twice.ink[i]) > 1e-12) ++changed;
        worst_changed = std::max(worst_changed, double(changed) / double(once.ink.size()));
    }
    bool pass = worst_changed < 1e-3;
    return {pass, fmt("floaters removed, second pass changed at most %.4f%% of pixels",
                      100.0 * worst_changed)};
}

// ---- criterion 9: benchmark aggregates recompute and reruns are identical ----

Outcome criterion9() {
    const char* kSmokeList = "swims\nnoon\nradar\nhello\nstone\n";
    const char* kSmokeSha = "d94a2ffdf1f81f4ea47f1219aa9580244a3e887e297f7467cc1ef45f8d734d6a";
    const std::string words_path = "acceptance-words.txt";
    {
        std::ofstream out(words_path, std::ios::binary);
        out << kSmokeList;
    }
    std::vector<std::string> words = load_word_list(words_path, kSmokeSha);
    if (words.size() != 5) return {false, "smoke list did not load 5 words"};

    const FontFile& font = testutil::font();
    AmbigramFontMap map;
    for (const std::string& w : words) {
        size_t N = w.size();
        for (size_t i = 0; i < N; ++i) {
            char a = char(std::toupper((unsigned char)w[i]));
            char b = char(std::toupper((unsigned char)w[N - 1 - i]));
            if (!map.has(a, b)) map.set(a, b, load_font_glyph(font, {a, Case::Upper}));
        }
    }

    StubOcr ocr;
    EvalReport report = run_benchmark(words, map, ocr, 64, "smoke");
    size_t correct = 0;
    double dist = 0;
    for (const WordRecord& r : report.records) {
        correct += r.correct;
        dist += r.edit_distance_sum;
    }
    if (report.accuracy != double(correct) / double(report.records.size()))
        return {false, "accuracy does not recompute from the records"};
    if (report.mean_edit_distance != dist / double(report.records.size()))
        return {false, "mean edit distance does not recompute from the records"};

    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    write_report(report, "acceptance-report-a.jsonl", "acceptance-summary-a.json");
    EvalReport rerun = run_benchmark(words, map, ocr, 64, "smoke");
    write_report(rerun, "acceptance-report-b.jsonl", "acceptance-summary-b.json");
    bool identical = slurp("acceptance-report-a.jsonl") == slurp("acceptance-report-b.jsonl") &&
                     slurp("acceptance-summary-a.json") == slurp("acceptance-summary-b.json");
    for (const char* p : {"acceptance-words.txt", "acceptance-report-a.jsonl",
                          "acceptance-summary-a.json", "acceptance-report-b.jsonl",
                          "acceptance-summary-b.json"})
        std::remove(p);
    if (!identical) return {false, "rerun produced different report bytes"};
    return {true, fmt("aggregates recompute exactly (accuracy %.2f, mean distance %.2f), reruns byte-identical",
                      report.accuracy, report.mean_edit_distance)};
}

// ---- criterion 10: a repeated design run is bitwise identical ----

Outcome criterion10() {
    const FontFile& font = testutil::font();
    const LetterClassifier& clf = testutil::classifier();
    ClassifierBackend backend(clf);

    GridSpec grid;
    grid.lambdas = {0.3, 0.7};
    grid.schemes = {AlignmentScheme::Naive, AlignmentScheme::MaxOverlap};
    grid.policy = CasePolicy::Upper;
    HyperParams base;
    base.steps_letter = 60;
    base.seed = 23;

    GridResult first = grid_search('O', 'S', grid, font, base, backend, clf);
    GridResult second = grid_search('O', 'S', grid, font, base, backend, clf);
    if (first.candidates.size() != second.candidates.size() || !first.failures.empty())
        return {false, "reruns disagree on candidate count"};
    for (size_t k = 0; k < first.candidates.size(); ++k) {
        const DesignCandidate& f = first.candidates[k];
        const DesignCandidate& s = second.candidates[k];
        if (f.hyper.seed != s.hyper.seed || f.legibility != s.legibility)
            return {false, fmt("ranking slot %zu differs between reruns", k)};
        std::vector<double> pf = flatten_points(f.glyph), ps = flatten_points(s.glyph);
        if (pf != ps) return {false, fmt("control points differ at ranking slot %zu", k)};
    }
    return {true, fmt("%zu candidates bitwise identical across reruns, same ranking order",
                      first.candidates.size())};
}

} // namespace

int main() {
    struct Entry {
        int number;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
    };
    int failed = 0;
    for (const Entry& e : entries) {
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("criterion %d: %s (%s)\n", e.number, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str());
        std::fflush(stdout);
        failed += !out.pass;
    }
    return failed == 0 ? 0 : 1;
}
