#include "ambigen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/rng.hpp"

namespace ambigen {

void HyperParams::validate() const {
    weights.validate();
    if (steps_letter < 0 || steps_word < 0) throw ConfigError("step counts must be nonnegative");
    if (batch_augment < 1) throw ConfigError("batch_augment must be at least 1");
    if (!(lr > 0)) throw ConfigError("learning rate must be positive");
    if (!(lr_decay_to > 0 && lr_decay_to <= 1) || !(style_decay_to > 0 && style_decay_to <= 1))
        throw ConfigError("decay factors must be in (0,1]");
    if (!(distortion_letter >= 0 && distortion_letter < 1) ||
        !(distortion_word >= 0 && distortion_word < 1))
        throw ConfigError("distortion scales must be in [0,1)");
    if (!(sigma_min > 0) || !(sigma_max >= sigma_min))
        throw ConfigError("sigma range must satisfy 0 < sigma_min <= sigma_max");
    if (!(adam_eps > 0)) throw ConfigError("adam_eps must be positive");
    if (paas_samples < 1) throw ConfigError("paas_samples must be at least 1");
    if (resolution < 8) throw ConfigError("resolution must be at least 8");
    if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be positive");
}

namespace {

double decayed(double initial, double decay_to, int step, int total) {
    if (total <= 1) return initial;
    return initial * std::pow(decay_to, double(step) / double(total - 1));
}

} // namespace

double HyperParams::lr_at(int step, int total) const { return decayed(lr, lr_decay_to, step, total); }

double HyperParams::style_weight_at(int step, int total) const {
    return decayed(1.0, style_decay_to, step, total);
}

namespace {

double sigma_at(const HyperParams& hp, uint64_t tag, int step) {
    Rng rng(derive_seed(hp.seed, {tag, uint64_t(step)}));
    return hp.sigma_min + (hp.sigma_max - hp.sigma_min) * rng.uniform();
}

void check_finite(const std::vector<double>& grad, const std::string& where) {
    for (double g : grad)
        if (!std::isfinite(g)) throw NonFiniteGradient("non-finite gradient during " + where);
}

// Mean over batch_augment perspective views of the legibility ascent pulled
// back to the clean image, negated into a descent direction.
Raster augmented_descent(const Raster& x, const ConditioningEmbedding& c_up,
                         const ConditioningEmbedding& c_down, double lambda,
                         GuidanceBackend& backend, const HyperParams& hp, double distortion,
                         double sigma, uint64_t view_tag, uint64_t grad_tag, int step,
                         bool pair_shape) {
    Raster descent(x.height, x.width);
    for (int k = 0; k < hp.batch_augment; ++k) {
        Rng wr(derive_seed(hp.seed, {view_tag, uint64_t(step), uint64_t(k)}));
        PerspectiveWarp w = random_perspective(x.height, x.width, distortion, wr);
        Raster view = warp(x, w);
        uint64_t gseed = derive_seed(hp.seed, {grad_tag, uint64_t(step), uint64_t(k)});
        Raster ascent = pair_shape
                            ? word_gradient(view, c_up, c_down, backend, sigma, gseed,
                                            hp.paas_samples)
                            : letter_gradient(view, c_up, c_down, lambda, backend, sigma, gseed,
                                              hp.paas_samples);
        Raster pulled = warp_backward(ascent, w, x.height, x.width);
        for (size_t i = 0; i < descent.ink.size(); ++i)
            descent.ink[i] -= pulled.ink[i] / hp.batch_augment;
    }
    return descent;
}

void add_scaled(Raster& into, const Raster& from, double scale) {
    for (size_t i = 0; i < into.ink.size(); ++i) into.ink[i] += scale * from.ink[i];
}

} // namespace

Glyph optimize_letter(const CasedLetter& up, const CasedLetter& down, const FontFile& font,
                      const HyperParams& hyper, GuidanceBackend& backend,
                      const FontAttributePredictor* predictor, const StyleTarget* style,
                      const CheckpointFn& checkpoint, const OptState* resume) {
    hyper.validate();
    Glyph glyph = init_letter_pair(up, down, font, hyper.scheme);

    ConditioningEmbedding c_up = embed_letter_prompt(up, backend);
    ConditioningEmbedding c_down = embed_letter_prompt(down, backend);

    std::vector<double> params = flatten_points(glyph);
    Adam adam;
    adam.eps = hyper.adam_eps;
    adam.init(params.size());
    int start = 0;
    if (resume) {
        if (resume->params.size() != params.size())
            throw DimensionMismatch("resume state has " + std::to_string(resume->params.size()) +
                                    " params, glyph needs " + std::to_string(params.size()));
        params = resume->params;
        // moments and step count are state; betas and eps stay configuration
        adam.m = resume->adam.m;
        adam.v = resume->adam.v;
        adam.t = resume->adam.t;
        start = resume->step;
        apply_points(glyph, params);
    }

    RasterizeOptions opt;
    opt.resolution = hyper.resolution;
    bool symmetric = up.rendered() == down.rendered();
    std::string self_word(1, up.rendered());
    double lam = hyper.weights.lambda_letter;

    for (int t = start; t < hyper.steps_letter; ++t) {
        double sigma = sigma_at(hyper, 0x7369676d, t);
        RasterResult rr = rasterize(glyph, opt);

        Raster descent = augmented_descent(rr.image, c_up, c_down, lam, backend, hyper,
                                           hyper.distortion_letter, sigma, 0x77617270, 0x6c657474,
                                           t, false);

        double sw = hyper.style_weight_at(t, hyper.steps_letter);
        if (hyper.weights.lambda_font > 0 && predictor && style) {
            ScalarLoss fl = font_loss({rr.image}, *predictor, *style,
                                      derive_seed(hyper.seed, {0x7374796c, uint64_t(t)}));
            add_scaled(descent, fl.image_grads[0], hyper.weights.lambda_font * sw);
        }
        if (hyper.weights.lambda_const > 0 && symmetric) {
            ScalarLoss cl = consistency_loss({rr.image}, self_word, self_word);
            add_scaled(descent, cl.image_grads[0], hyper.weights.lambda_const * sw);
        }

        std::vector<double> grad = rasterize_backward(*rr.tape, descent);
        check_finite(grad, "letter step " + std::to_string(t) + " of " + std::string(1, up.rendered()) +
                               "/" + std::string(1, down.rendered()));
        adam.step(params, grad, hyper.lr_at(t, hyper.steps_letter));
        apply_points(glyph, params);

        if (checkpoint && (t + 1) % hyper.checkpoint_every == 0)
            checkpoint(OptState{t + 1, params, adam});
    }
    return glyph;
}

Raster postprocess(const Raster& img, int median_passes, double unsharp_amount) {
    Raster out = img;
    for (int i = 0; i < median_passes; ++i) out = median3(out);
    return unsharp(out, unsharp_amount);
}

std::vector<DesignCandidate> rank_candidates(std::vector<DesignCandidate> candidates,
                                             const LetterClassifier& classifier) {
    RasterizeOptions opt;
    opt.resolution = LetterClassifier::kResolution;
    for (DesignCandidate& c : candidates) {
        Raster r = postprocess(rasterize(c.glyph, opt).image);
        double ce_up = classifier.cross_entropy(r, LetterClassifier::class_index(c.up));
        double ce_down =
            classifier.cross_entropy(rotate180(r), LetterClassifier::class_index(c.down));
        c.legibility = ce_up + ce_down;
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const DesignCandidate& a, const DesignCandidate& b) {
                         return a.legibility < b.legibility;
                     });
    return candidates;
}

std::vector<std::pair<Case, Case>> GridSpec::case_combos() const {
    switch (policy) {
        case CasePolicy::Upper: return {{Case::Upper, Case::Upper}};
        case CasePolicy::Lower: return {{Case::Lower, Case::Lower}};
        case CasePolicy::TryBoth:
            return {{Case::Upper, Case::Upper},
                    {Case::Upper, Case::Lower},
                    {Case::Lower, Case::Upper},
                    {Case::Lower, Case::Lower}};
    }
    return {};
}

GridResult grid_search(char a, char b, const GridSpec& grid, const FontFile& font,
                       const HyperParams& base, GuidanceBackend& backend,
                       const LetterClassifier& ranker, const FontAttributePredictor* predictor,
                       const StyleTarget* style) {
    GridResult out;
    auto combos = grid.case_combos();
    for (size_t li = 0; li < grid.lambdas.size(); ++li) {
        for (size_t si = 0; si < grid.schemes.size(); ++si) {
            for (size_t ci = 0; ci < combos.size(); ++ci) {
                HyperParams h = base;
                h.weights.lambda_letter = grid.lambdas[li];
                h.scheme = grid.schemes[si];
                h.seed = derive_seed(base.seed, {0x67726964, li, si, ci});
                CasedLetter up(a, combos[ci].first);
                CasedLetter down(b, combos[ci].second);
                std::string cell = std::string("lambda=") + std::to_string(grid.lambdas[li]) +
                                   " scheme=" + scheme_name(grid.schemes[si]) + " case=" +
                                   up.rendered() + std::string(1, down.rendered());
                try {
                    DesignCandidate c;
                    c.glyph = optimize_letter(up, down, font, h, backend, predictor, style);
                    c.hyper = h;
                    c.up = up;
                    c.down = down;
                    out.candidates.push_back(std::move(c));
                } catch (const Error& e) {
                    out.failures.push_back({cell, e.what()});
                }
            }
        }
    }
    out.candidates = rank_candidates(std::move(out.candidates), ranker);
    return out;
}

GlyphSequence optimize_word(const AmbigramTask& task, const std::vector<Glyph>& letter_glyphs,
                            const HyperParams& hyper, GuidanceBackend& backend,
                            const WordCases* cases, const FontAttributePredictor* predictor,
                            const StyleTarget* style, const CheckpointFn& checkpoint,
                            const OptState* resume) {
    hyper.validate();
    task.validate();
    size_t N = task.length();
    if (letter_glyphs.size() != N)
        throw DimensionMismatch("word of length " + std::to_string(N) + " got " +
                                std::to_string(letter_glyphs.size()) + " glyphs");

    WordCases wc;
    if (cases) {
        wc = *cases;
        if (wc.up.size() != N || wc.down.size() != N)
            throw DimensionMismatch("case choices must cover every position");
    } else {
        for (size_t i = 0; i < N; ++i) {
            wc.up.push_back(task.policy[i] == CasePolicy::Lower ? Case::Lower : Case::Upper);
            wc.down.push_back(task.policy[i] == CasePolicy::Lower ? Case::Lower : Case::Upper);
        }
    }

    GlyphSequence seq = layout_word(letter_glyphs);
    const GlyphSequence anchor = seq;

    // pair n reads (a_n, a_n+1) upright and (b_N-2-n, b_N-1-n) upside down
    std::vector<ConditioningEmbedding> c_up, c_down;
    for (size_t n = 0; n + 1 < N; ++n) {
        c_up.push_back(embed_pair_prompt(CasedLetter(task.word_a[n], wc.up[n]),
                                         CasedLetter(task.word_a[n + 1], wc.up[n + 1]), backend));
        c_down.push_back(embed_pair_prompt(CasedLetter(task.word_b[N - 2 - n], wc.down[N - 2 - n]),
                                           CasedLetter(task.word_b[N - 1 - n], wc.down[N - 1 - n]),
                                           backend));
    }

    std::vector<double> params = flatten_points(seq);
    std::vector<size_t> offset(N + 1, 0);
    for (size_t g = 0; g < N; ++g)
        offset[g + 1] = offset[g] + flatten_points(seq.glyphs[g]).size();

    Adam adam;
    adam.eps = hyper.adam_eps;
    adam.init(params.size());
    int start = 0;
    if (resume) {
        if (resume->params.size() != params.size())
            throw DimensionMismatch("resume state does not match the word layout");
        params = resume->params;
        adam.m = resume->adam.m;
        adam.v = resume->adam.v;
        adam.t = resume->adam.t;
        start = resume->step;
        apply_points(seq, params);
    }

    RasterizeOptions opt;
    opt.resolution = hyper.resolution;

    for (int t = start; t < hyper.steps_word; ++t) {
        double sigma = sigma_at(hyper, 0x7773676d, t);

        std::vector<RasterResult> renders;
        std::vector<Raster> images;
        renders.reserve(N);
        for (size_t g = 0; g < N; ++g) {
            renders.push_back(rasterize(seq.glyphs[g], opt));
            images.push_back(renders.back().image);
        }
        std::vector<Raster> descent;
        for (size_t g = 0; g < N; ++g) descent.emplace_back(opt.resolution, opt.resolution);

        for (size_t n = 0; n + 1 < N; ++n) {
            Raster pair = concat_pair(images[n], images[n + 1]);
            Raster pd(pair.height, pair.width);
            for (int k = 0; k < hyper.batch_augment; ++k) {
                Rng wr(derive_seed(hyper.seed,
                                   {0x77777270, uint64_t(t), uint64_t(n), uint64_t(k)}));
                PerspectiveWarp w =
                    random_perspective(pair.height, pair.width, hyper.distortion_word, wr);
                Raster view = warp(pair, w);
                Raster ascent = word_gradient(
                    view, c_up[n], c_down[n], backend, sigma,
                    derive_seed(hyper.seed, {0x776f7264, uint64_t(t), uint64_t(n), uint64_t(k)}),
                    hyper.paas_samples);
                Raster pulled = warp_backward(ascent, w, pair.height, pair.width);
                for (size_t i = 0; i < pd.ink.size(); ++i)
                    pd.ink[i] -= pulled.ink[i] / hyper.batch_augment;
            }
            Raster l(opt.resolution, opt.resolution), r(opt.resolution, opt.resolution);
            split_pair(pd, l, r);
            add_scaled(descent[n], l, 1);
            add_scaled(descent[n + 1], r, 1);
        }

        if (hyper.style_in_word_stage) {
            double sw = hyper.style_weight_at(t, hyper.steps_word);
            if (hyper.weights.lambda_font > 0 && predictor && style) {
                ScalarLoss fl = font_loss(images, *predictor, *style,
                                          derive_seed(hyper.seed, {0x7773746c, uint64_t(t)}));
                for (size_t g = 0; g < N; ++g)
                    add_scaled(descent[g], fl.image_grads[g], hyper.weights.lambda_font * sw);
            }
            if (hyper.weights.lambda_const > 0 && task.word_a == task.word_b) {
                ScalarLoss cl = consistency_loss(images, task.word_a, task.word_b);
                for (size_t g = 0; g < N; ++g)
                    add_scaled(descent[g], cl.image_grads[g], hyper.weights.lambda_const * sw);
            }
        }

        std::vector<double> grad(params.size(), 0);
        for (size_t g = 0; g < N; ++g) {
            std::vector<double> pg = rasterize_backward(*renders[g].tape, descent[g]);
            for (size_t i = 0; i < pg.size(); ++i) grad[offset[g] + i] += pg[i];
        }
        PointLoss reg = word_deviation_reg(seq, anchor, hyper.weights.word_reg);
        for (size_t i = 0; i < grad.size(); ++i) grad[i] += reg.point_grads[i];

        check_finite(grad, "word step " + std::to_string(t) + " of \"" + task.word_a + "\"");
        adam.step(params, grad, hyper.lr_at(t, hyper.steps_word));
        apply_points(seq, params);

        if (checkpoint && (t + 1) % hyper.checkpoint_every == 0)
            checkpoint(OptState{t + 1, params, adam});
    }
    return seq;
}

namespace {

int pair_slot(char a, char b) {
    if (a < 'A' || a > 'Z' || b < 'A' || b > 'Z')
        throw ConfigError(std::string("font map letters must be A-Z, got '") + a + "','" + b + "'");
    return (a - 'A') * AmbigramFontMap::kLetters + (b - 'A');
}

} // namespace

const Glyph& AmbigramFontMap::get(char a, char b) const {
    const auto& slot = glyphs_[pair_slot(a, b)];
    if (!slot) throw MissingPair(std::string("no glyph for pair (") + a + "," + b + ")");
    return *slot;
}

void AmbigramFontMap::set(char a, char b, Glyph g) { glyphs_[pair_slot(a, b)] = std::move(g); }

bool AmbigramFontMap::has(char a, char b) const { return bool(glyphs_[pair_slot(a, b)]); }

size_t AmbigramFontMap::size() const {
    size_t n = 0;
    for (const auto& s : glyphs_)
        if (s) ++n;
    return n;
}

AmbigramFontMap assemble_font(const std::map<std::pair<char, char>, DesignCandidate>& best,
                              bool reuse_rotated) {
    AmbigramFontMap font;
    for (const auto& [key, cand] : best) font.set(key.first, key.second, cand.glyph);
    if (reuse_rotated) {
        for (char a = 'A'; a <= 'Z'; ++a)
            for (char b = 'A'; b <= 'Z'; ++b)
                if (!font.has(a, b) && font.has(b, a)) font.set(a, b, rotate180(font.get(b, a)));
    }
    std::string missing;
    size_t miss_count = 0;
    for (char a = 'A'; a <= 'Z'; ++a) {
        for (char b = 'A'; b <= 'Z'; ++b) {
            if (font.has(a, b)) continue;
            ++miss_count;
            if (missing.size() < 60) missing += std::string("(") + a + "," + b + ") ";
        }
    }
    if (miss_count)
        throw MissingPair("font map is missing " + std::to_string(miss_count) + " pairs: " +
                          missing + (miss_count > 10 ? "..." : ""));
    return font;
}

namespace {

constexpr char kCheckpointMagic[8] = {'A', 'M', 'C', 'K', '0', '1', '\n', 0};

void put_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
    out.write((const char*)b, 8);
}

uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read((char*)b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    out.write((const char*)v.data(), (std::streamsize)(v.size() * sizeof(double)));
}

std::vector<double> get_vec(std::istream& in) {
    std::vector<double> v(get_u64(in));
    in.read((char*)v.data(), (std::streamsize)(v.size() * sizeof(double)));
    return v;
}

} // namespace

void save_checkpoint(const OptState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint at " + path);
    out.write(kCheckpointMagic, 8);
    put_u64(out, (uint64_t)state.step);
    put_u64(out, (uint64_t)state.adam.t);
    put_vec(out, state.params);
    put_vec(out, state.adam.m);
    put_vec(out, state.adam.v);
    if (!out) throw IoError("short write on checkpoint at " + path);
}

OptState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint at " + path);
    char magic[8] = {};
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kCheckpointMagic, 8))
        throw IoError("not a checkpoint file: " + path);
    OptState state;
    state.step = (int)get_u64(in);
    state.adam.t = (int)get_u64(in);
    state.params = get_vec(in);
    state.adam.m = get_vec(in);
    state.adam.v = get_vec(in);
    if (!in) throw IoError("truncated checkpoint at " + path);
    if (state.adam.m.size() != state.params.size() || state.adam.v.size() != state.params.size())
        throw IoError("checkpoint moment sizes disagree with params at " + path);
    return state;
}

Raster optimize_pixels(const CasedLetter& up, const CasedLetter& down, const HyperParams& hyper,
                       GuidanceBackend& backend) {
    hyper.validate();
    ConditioningEmbedding c_up = embed_letter_prompt(up, backend);
    ConditioningEmbedding c_down = embed_letter_prompt(down, backend);

    Raster x(hyper.resolution, hyper.resolution, 0.5);
    Adam adam;
    adam.eps = hyper.adam_eps;
    adam.init(x.ink.size());
    double lam = hyper.weights.lambda_letter;

    for (int t = 0; t < hyper.steps_letter; ++t) {
        double sigma = sigma_at(hyper, 0x7369676d, t);
        Raster descent = augmented_descent(x, c_up, c_down, lam, backend, hyper,
                                           hyper.distortion_letter, sigma, 0x77617270, 0x6c657474,
                                           t, false);
        check_finite(descent.ink, "pixel step " + std::to_string(t));
        adam.step(x.ink, descent.ink, hyper.lr_at(t, hyper.steps_letter));
        for (double& v : x.ink) v = std::clamp(v, 0.0, 1.0);
    }
    return x;
}

} // namespace ambigen
