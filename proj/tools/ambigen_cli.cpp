// ambigen: design rotational ambigrams from the command line.
//
// Subcommands: design-letter, design-word, benchmark, render, rank,
// train-classifier. Settings resolve flags > config file > defaults; every
// run writes a deterministic manifest.json it can be reproduced from.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ambigen/config.hpp"
#include "ambigen/errors.hpp"
#include "ambigen/eval.hpp"
#include "ambigen/font.hpp"
#include "ambigen/guidance.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/layout.hpp"
#include "ambigen/losses.hpp"
#include "ambigen/pipeline.hpp"
#include "ambigen/png_io.hpp"
#include "ambigen/rng.hpp"
#include "ambigen/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ambigen;

namespace {

// training seed for the cached letter classifier; fixed so every run and
// every command shares one cache file per font
constexpr uint64_t kClassifierSeed = 11;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write on " + path.string());
}

std::string resolve_font(const RunConfig& cfg) {
    return cfg.font_path.empty() ? find_system_font() : cfg.font_path;
}

// relative cache paths live under $AMBIGEN_CHECKPOINT_ROOT when it is set
std::string resolve_cache(const std::string& cache) {
    fs::path p(cache);
    if (p.is_absolute()) return cache;
    const char* root = std::getenv("AMBIGEN_CHECKPOINT_ROOT");
    if (root && *root) return (fs::path(root) / p).string();
    return cache;
}

std::unique_ptr<GuidanceBackend> make_backend(const RunConfig& cfg,
                                              const LetterClassifier* classifier) {
    if (cfg.backend == "classifier") {
        if (!classifier) throw ConfigError("classifier backend needs a trained classifier");
        return std::make_unique<ClassifierBackend>(*classifier);
    }
    if (cfg.backend == "analytic")
        return std::make_unique<AnalyticGaussianBackend>(
            Raster(cfg.hyper.resolution, cfg.hyper.resolution, 0.0), 1.0);
    if (cfg.backend == "http")
        return std::make_unique<DiffusionHttpBackend>(cfg.backend_url, cfg.hyper.resolution,
                                                      cfg.cfg_scale);
    throw ConfigError("unknown backend \"" + cfg.backend + "\"");
}

LetterClassifier shared_classifier(const RunConfig& cfg, const FontFile& font) {
    return load_or_train_classifier(font, resolve_cache(cfg.classifier_cache), kClassifierSeed);
}

// the schema echo a manifest carries; same keys the config file accepts
json config_json(const RunConfig& cfg) {
    json j;
    j["word_a"] = cfg.word_a;
    j["word_b"] = cfg.word_b;
    j["policy"] = cfg.policy;
    j["font"] = cfg.font_path;
    j["backend"] = cfg.backend;
    j["backend_url"] = cfg.backend_url;
    j["cfg_scale"] = cfg.cfg_scale;
    j["classifier_cache"] = cfg.classifier_cache;
    j["out"] = cfg.out_dir;
    j["seed"] = cfg.hyper.seed;
    j["steps_letter"] = cfg.hyper.steps_letter;
    j["steps_word"] = cfg.hyper.steps_word;
    j["batch_augment"] = cfg.hyper.batch_augment;
    j["lr"] = cfg.hyper.lr;
    j["lr_decay_to"] = cfg.hyper.lr_decay_to;
    j["style_decay_to"] = cfg.hyper.style_decay_to;
    j["sigma_min"] = cfg.hyper.sigma_min;
    j["sigma_max"] = cfg.hyper.sigma_max;
    j["adam_eps"] = cfg.hyper.adam_eps;
    j["paas_samples"] = cfg.hyper.paas_samples;
    j["resolution"] = cfg.hyper.resolution;
    j["checkpoint_every"] = cfg.hyper.checkpoint_every;
    j["lambda_letter"] = cfg.hyper.weights.lambda_letter;
    j["lambda_font"] = cfg.hyper.weights.lambda_font;
    j["lambda_const"] = cfg.hyper.weights.lambda_const;
    j["word_reg"] = cfg.hyper.weights.word_reg;
    j["distortion_letter"] = cfg.hyper.distortion_letter;
    j["distortion_word"] = cfg.hyper.distortion_word;
    j["style_in_word_stage"] = cfg.hyper.style_in_word_stage;
    j["scheme"] = scheme_name(cfg.hyper.scheme);
    j["lambdas"] = cfg.lambdas;
    j["schemes"] = cfg.schemes;
    j["words"] = cfg.words_path;
    j["words_sha256"] = cfg.words_sha256;
    j["ocr"] = cfg.ocr;
    j["font_map"] = cfg.font_map_dir;
    j["store"] = cfg.store_dir;
    return j;
}

std::string lambda_dir(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "lambda-%.2f", lambda);
    return buf;
}

std::string pair_dir(const CasedLetter& up, const CasedLetter& down) {
    return std::string(1, up.rendered()) + down.rendered();
}

char single_letter(const std::string& word, const char* which) {
    if (word.size() != 1 || !std::isalpha((unsigned char)word[0]))
        throw ConfigError(std::string(which) + " must be a single letter A-Z, got \"" + word +
                          "\"");
    return char(std::toupper((unsigned char)word[0]));
}

Raster render_glyph_png(const Glyph& g, int resolution) {
    RasterizeOptions opt;
    opt.resolution = resolution;
    return postprocess(rasterize(g, opt).image);
}

// ---------------------------------------------------------------- design-letter

struct CellOutcome {
    bool ok = false;
    DesignCandidate candidate;
    std::string cell;
    std::string message;
    std::string rel_path;
};

int cmd_design_letter(const RunConfig& cfg, bool dry_run, bool resume, int workers) {
    cfg.validate();
    char a = single_letter(cfg.word_a, "word_a");
    char b = single_letter(cfg.word_b, "word_b");
    GridSpec grid = cfg.grid_spec();
    auto combos = grid.case_combos();

    if (dry_run) {
        std::cout << "grid: " << grid.lambdas.size() << " lambdas x " << grid.schemes.size()
                  << " schemes x " << combos.size() << " case combos = " << grid.cell_count()
                  << " cells\n";
        std::cout << "lambdas:";
        for (double l : grid.lambdas) std::cout << ' ' << l;
        std::cout << "\nschemes:";
        for (auto s : grid.schemes) std::cout << ' ' << scheme_name(s);
        std::cout << "\ncases:";
        for (auto& [cu, cd] : combos)
            std::cout << ' ' << CasedLetter(a, cu).rendered() << CasedLetter(b, cd).rendered();
        std::cout << '\n';
        return 0;
    }

    std::string font_path = resolve_font(cfg);
    FontFile font(font_path);
    LetterClassifier classifier = shared_classifier(cfg, font);

    bool want_style = cfg.hyper.weights.lambda_font > 0;
    MomentAttributePredictor predictor;
    StyleTarget style;
    if (want_style) style = style_from_font(font, predictor, cfg.hyper.resolution);

    struct Cell {
        size_t li, si, ci;
    };
    std::vector<Cell> cells;
    for (size_t li = 0; li < grid.lambdas.size(); ++li)
        for (size_t si = 0; si < grid.schemes.size(); ++si)
            for (size_t ci = 0; ci < combos.size(); ++ci) cells.push_back({li, si, ci});

    fs::create_directories(cfg.out_dir);
    std::vector<CellOutcome> outcomes(cells.size());
    std::atomic<size_t> next{0};
    std::mutex log_mutex;

    auto run_cells = [&](GuidanceBackend& backend) {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            const Cell& cell = cells[i];
            HyperParams h = cfg.hyper;
            h.weights.lambda_letter = grid.lambdas[cell.li];
            h.scheme = grid.schemes[cell.si];
            h.seed = derive_seed(cfg.hyper.seed, {0x67726964, cell.li, cell.si, cell.ci});
            CasedLetter up(a, combos[cell.ci].first);
            CasedLetter down(b, combos[cell.ci].second);

            CellOutcome& out = outcomes[i];
            out.rel_path = pair_dir(up, down) + "/" + lambda_dir(grid.lambdas[cell.li]) + "/" +
                           scheme_name(grid.schemes[cell.si]);
            out.cell = "lambda=" + std::to_string(grid.lambdas[cell.li]) +
                       " scheme=" + scheme_name(grid.schemes[cell.si]) + " case=" +
                       up.rendered() + std::string(1, down.rendered());
            fs::path cell_dir = fs::path(cfg.out_dir) / out.rel_path;
            fs::create_directories(cell_dir);
            fs::path ckpt = cell_dir / "checkpoint.bin";

            {
                std::lock_guard<std::mutex> lk(log_mutex);
                std::cerr << "[" << (i + 1) << "/" << cells.size() << "] " << out.cell << "\n";
            }
            try {
                OptState state;
                const OptState* from = nullptr;
                if (resume && fs::exists(ckpt)) {
                    state = load_checkpoint(ckpt.string());
                    from = &state;
                }
                CheckpointFn save = [&](const OptState& s) { save_checkpoint(s, ckpt.string()); };
                out.candidate.glyph =
                    optimize_letter(up, down, font, h, backend, want_style ? &predictor : nullptr,
                                    want_style ? &style : nullptr, save, from);
                out.candidate.hyper = h;
                out.candidate.up = up;
                out.candidate.down = down;
                out.ok = true;
            } catch (const Error& e) {
                out.message = e.what();
            }
        }
    };

    if (workers <= 1) {
        auto backend = make_backend(cfg, &classifier);
        run_cells(*backend);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                auto backend = make_backend(cfg, &classifier);  // one per worker
                run_cells(*backend);
            });
        for (auto& t : pool) t.join();
    }

    std::vector<DesignCandidate> candidates;
    std::vector<std::string> cand_paths;
    json failures = json::array();
    for (const CellOutcome& out : outcomes) {
        if (out.ok) {
            candidates.push_back(out.candidate);
            cand_paths.push_back(out.rel_path);
        } else {
            failures.push_back({{"cell", out.cell}, {"message", out.message}});
        }
    }

    // ranking reorders; remember where each candidate lives by its seed
    std::map<uint64_t, std::string> path_by_seed;
    for (size_t i = 0; i < candidates.size(); ++i)
        path_by_seed[candidates[i].hyper.seed] = cand_paths[i];
    candidates = rank_candidates(std::move(candidates), classifier);

    json ranking = json::array();
    std::set<std::string> prompts;
    for (size_t rank = 0; rank < candidates.size(); ++rank) {
        const DesignCandidate& c = candidates[rank];
        const std::string& rel = path_by_seed.at(c.hyper.seed);
        fs::path cell_dir = fs::path(cfg.out_dir) / rel;
        spit(cell_dir / "design.svg", to_svg(c.glyph));
        write_png_gray((cell_dir / "design.png").string(), render_glyph_png(c.glyph, 256));
        json score;
        score["up"] = std::string(1, c.up.rendered());
        score["down"] = std::string(1, c.down.rendered());
        score["lambda"] = c.hyper.weights.lambda_letter;
        score["scheme"] = scheme_name(c.hyper.scheme);
        score["seed"] = c.hyper.seed;
        score["legibility"] = c.legibility;
        score["rank"] = rank;
        spit(cell_dir / "score.json", score.dump(2) + "\n");
        score["path"] = rel;
        ranking.push_back(score);
        prompts.insert(letter_prompt(c.up));
        prompts.insert(letter_prompt(c.down));
    }
    spit(fs::path(cfg.out_dir) / "ranking.json", ranking.dump(2) + "\n");

    json manifest;
    manifest["command"] = "design-letter";
    manifest["config"] = config_json(cfg);
    manifest["letters"] = std::string(1, a) + b;
    json jgrid;
    jgrid["lambdas"] = grid.lambdas;
    json jschemes = json::array();
    for (auto s : grid.schemes) jschemes.push_back(scheme_name(s));
    jgrid["schemes"] = jschemes;
    json jcases = json::array();
    for (auto& [cu, cd] : combos)
        jcases.push_back(std::string(1, CasedLetter(a, cu).rendered()) +
                         CasedLetter(b, cd).rendered());
    jgrid["cases"] = jcases;
    jgrid["cells"] = grid.cell_count();
    manifest["grid"] = jgrid;
    manifest["prompts"] = json(prompts);
    manifest["failures"] = failures;
    manifest["ranking"] = ranking;
    spit(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

    if (!candidates.empty())
        std::cout << "best: " << path_by_seed.at(candidates[0].hyper.seed)
                  << " legibility=" << candidates[0].legibility << "\n";
    std::cout << candidates.size() << " candidates, " << failures.size() << " failures -> "
              << cfg.out_dir << "\n";
    return failures.size() == outcomes.size() && !outcomes.empty() ? 1 : 0;
}

// ---------------------------------------------------------------- design-word

struct LetterSource {
    Glyph glyph;
    Case up_case = Case::Upper;
    Case down_case = Case::Upper;
    std::string origin;
};

// best stored candidate for the ordered pair, searching every ranking.json
// under the given store roots
std::optional<LetterSource> find_in_stores(const std::vector<std::string>& stores, char a,
                                           char b) {
    std::optional<LetterSource> best;
    double best_score = 0;
    std::vector<fs::path> rankings;
    for (const std::string& root : stores) {
        if (fs::exists(fs::path(root) / "ranking.json"))
            rankings.push_back(fs::path(root) / "ranking.json");
        if (fs::is_directory(root))
            for (const auto& e : fs::directory_iterator(root))
                if (e.is_directory() && fs::exists(e.path() / "ranking.json"))
                    rankings.push_back(e.path() / "ranking.json");
    }
    std::sort(rankings.begin(), rankings.end());
    for (const fs::path& rk : rankings) {
        json list = json::parse(slurp(rk.string()));
        for (const json& entry : list) {
            std::string up = entry.at("up").get<std::string>();
            std::string down = entry.at("down").get<std::string>();
            if (std::toupper((unsigned char)up[0]) != a ||
                std::toupper((unsigned char)down[0]) != b)
                continue;
            double score = entry.at("legibility").get<double>();
            if (best && best_score <= score) continue;
            fs::path svg = rk.parent_path() / entry.at("path").get<std::string>() / "design.svg";
            LetterSource src;
            src.glyph = from_svg(slurp(svg.string()));
            src.up_case = std::isupper((unsigned char)up[0]) ? Case::Upper : Case::Lower;
            src.down_case = std::isupper((unsigned char)down[0]) ? Case::Upper : Case::Lower;
            src.origin = svg.string();
            best = std::move(src);
            best_score = score;
        }
    }
    return best;
}

std::optional<LetterSource> find_in_font_map(const std::string& dir, char a, char b,
                                             CasePolicy policy) {
    fs::path svg = fs::path(dir) / (std::string(1, a) + b + ".svg");
    if (!fs::exists(svg)) return std::nullopt;
    LetterSource src;
    src.glyph = from_svg(slurp(svg.string()));
    src.up_case = policy == CasePolicy::Lower ? Case::Lower : Case::Upper;
    src.down_case = src.up_case;
    src.origin = svg.string();
    return src;
}

int cmd_design_word(const RunConfig& cfg, const std::vector<std::string>& stores, bool resume) {
    cfg.validate();
    AmbigramTask task = make_task(cfg.word_a, cfg.word_b, cfg.case_policy());
    size_t N = task.length();

    std::vector<std::string> roots = stores;
    if (!cfg.store_dir.empty()) roots.push_back(cfg.store_dir);
    if (roots.empty() && cfg.font_map_dir.empty())
        throw ConfigError("design-word needs --store or --font-map to source letter designs");

    std::vector<LetterSource> sources;
    std::string missing;
    for (size_t i = 0; i < N; ++i) {
        char pa = task.word_a[i];
        char pb = task.word_b[N - 1 - i];
        std::optional<LetterSource> src;
        if (!roots.empty()) src = find_in_stores(roots, pa, pb);
        if (!src && !cfg.font_map_dir.empty())
            src = find_in_font_map(cfg.font_map_dir, pa, pb, cfg.case_policy());
        if (!src) {
            missing += std::string(" ") + pa + pb;
            continue;
        }
        sources.push_back(std::move(*src));
    }
    if (!missing.empty()) throw MissingPair("no stored design for pair(s):" + missing);

    std::vector<Glyph> glyphs;
    WordCases cases;
    for (size_t i = 0; i < N; ++i) {
        glyphs.push_back(sources[i].glyph);
        cases.up.push_back(sources[i].up_case);
        cases.down.push_back(Case::Upper);
    }
    // down cases index word_b positions; source i speaks for position N-1-i
    for (size_t i = 0; i < N; ++i) cases.down[N - 1 - i] = sources[i].down_case;

    std::string font_path = resolve_font(cfg);
    FontFile font(font_path);
    LetterClassifier classifier = shared_classifier(cfg, font);
    auto backend = make_backend(cfg, &classifier);

    bool want_style = cfg.hyper.style_in_word_stage && cfg.hyper.weights.lambda_font > 0;
    MomentAttributePredictor predictor;
    StyleTarget style;
    if (want_style) style = style_from_font(font, predictor, cfg.hyper.resolution);

    fs::create_directories(cfg.out_dir);
    fs::path ckpt = fs::path(cfg.out_dir) / "checkpoint.bin";
    OptState state;
    const OptState* from = nullptr;
    if (resume && fs::exists(ckpt)) {
        state = load_checkpoint(ckpt.string());
        from = &state;
    }
    CheckpointFn save = [&](const OptState& s) { save_checkpoint(s, ckpt.string()); };

    GlyphSequence word =
        optimize_word(task, glyphs, cfg.hyper, *backend, &cases, want_style ? &predictor : nullptr,
                      want_style ? &style : nullptr, save, from);

    GlyphSequence rotated = word;
    for (size_t i = 0; i < N; ++i) rotated.glyphs[i] = rotate180(word.glyphs[N - 1 - i]);

    json outputs = json::array();
    auto emit = [&](const std::string& name, const std::string& text) {
        spit(fs::path(cfg.out_dir) / name, text);
        outputs.push_back(name);
    };
    emit("word.svg", to_svg(word));
    emit("word-rotated.svg", to_svg(rotated));
    for (size_t i = 0; i < N; ++i)
        emit("glyph-" + std::to_string(i) + ".svg", to_svg(word.glyphs[i]));

    RasterizeOptions opt;
    opt.resolution = 256;
    write_png_gray((fs::path(cfg.out_dir) / "word.png").string(),
                   postprocess(rasterize(word, opt).image));
    outputs.push_back("word.png");
    write_png_gray((fs::path(cfg.out_dir) / "word-rotated.png").string(),
                   postprocess(rasterize(rotated, opt).image));
    outputs.push_back("word-rotated.png");

    json manifest;
    manifest["command"] = "design-word";
    manifest["config"] = config_json(cfg);
    manifest["word_a"] = task.word_a;
    manifest["word_b"] = task.word_b;
    std::string cases_up, cases_down;
    for (size_t i = 0; i < N; ++i) {
        cases_up += CasedLetter(task.word_a[i], cases.up[i]).rendered();
        cases_down += CasedLetter(task.word_b[i], cases.down[i]).rendered();
    }
    manifest["cases_up"] = cases_up;
    manifest["cases_down"] = cases_down;
    json jsources = json::array();
    for (size_t i = 0; i < N; ++i)
        jsources.push_back({{"pair", std::string(1, task.word_a[i]) + task.word_b[N - 1 - i]},
                            {"path", sources[i].origin}});
    manifest["sources"] = jsources;
    std::set<std::string> prompts;
    for (size_t n = 0; n + 1 < N; ++n) {
        prompts.insert(pair_prompt(CasedLetter(task.word_a[n], cases.up[n]),
                                   CasedLetter(task.word_a[n + 1], cases.up[n + 1])));
        prompts.insert(pair_prompt(CasedLetter(task.word_b[N - 2 - n], cases.down[N - 2 - n]),
                                   CasedLetter(task.word_b[N - 1 - n], cases.down[N - 1 - n])));
    }
    manifest["prompts"] = json(prompts);
    manifest["outputs"] = outputs;
    spit(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

    std::cout << N << " glyphs -> " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------- benchmark

AmbigramFontMap load_font_map_dir(const std::string& dir, bool reuse_rotated) {
    if (!fs::is_directory(dir)) throw ConfigError("font map directory not found: " + dir);
    AmbigramFontMap map;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".svg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        std::string stem = f.stem().string();
        if (stem.size() != 2 || !std::isalpha((unsigned char)stem[0]) ||
            !std::isalpha((unsigned char)stem[1]))
            continue;
        map.set(char(std::toupper((unsigned char)stem[0])),
                char(std::toupper((unsigned char)stem[1])), from_svg(slurp(f.string())));
    }
    if (reuse_rotated)
        for (char a = 'A'; a <= 'Z'; ++a)
            for (char b = 'A'; b <= 'Z'; ++b)
                if (!map.has(a, b) && map.has(b, a)) map.set(a, b, rotate180(map.get(b, a)));
    return map;
}

int cmd_benchmark(const RunConfig& cfg, bool reuse_rotated) {
    cfg.validate();
    if (cfg.words_path.empty()) throw ConfigError("benchmark needs --words");
    if (cfg.font_map_dir.empty()) throw ConfigError("benchmark needs --font-map");

    std::vector<std::string> words = load_word_list(cfg.words_path, cfg.words_sha256);
    AmbigramFontMap font_map = load_font_map_dir(cfg.font_map_dir, reuse_rotated);

    std::unique_ptr<OcrAdapter> ocr;
    if (cfg.ocr == "stub") {
        ocr = std::make_unique<StubOcr>();
    } else {
        FontFile font(resolve_font(cfg));
        ocr = std::make_unique<ClassifierGridOcr>(shared_classifier(cfg, font));
    }

    EvalReport report = run_benchmark(words, font_map, *ocr, cfg.hyper.resolution,
                                      fs::path(cfg.font_map_dir).filename().string());

    fs::create_directories(cfg.out_dir);
    write_report(report, (fs::path(cfg.out_dir) / "report.jsonl").string(),
                 (fs::path(cfg.out_dir) / "summary.json").string());

    json manifest;
    manifest["command"] = "benchmark";
    manifest["config"] = config_json(cfg);
    manifest["words"] = words.size();
    manifest["outputs"] = {"report.jsonl", "summary.json"};
    spit(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");

    std::printf("%zu words  accuracy=%.4f  mean_edit_distance=%.4f -> %s\n",
                report.records.size(), report.accuracy, report.mean_edit_distance,
                cfg.out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------- render / rank

int cmd_render(const std::string& in, const std::string& out, int resolution, bool rotate,
               bool raw) {
    Glyph g = from_svg(slurp(in));
    if (rotate) g = rotate180(g);
    RasterizeOptions opt;
    opt.resolution = resolution;
    Raster img = rasterize(g, opt).image;
    if (!raw) img = postprocess(img);
    write_png_gray(out, img);
    std::cout << out << " " << img.width << "x" << img.height << "\n";
    return 0;
}

int cmd_rank(const RunConfig& cfg, const std::string& store) {
    fs::path root = store.empty() ? fs::path(cfg.store_dir) : fs::path(store);
    if (root.empty()) throw ConfigError("rank needs --store");
    std::vector<fs::path> scores;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.path().filename() == "score.json") scores.push_back(e.path());
    std::sort(scores.begin(), scores.end());
    if (scores.empty()) throw ConfigError("no score.json found under " + root.string());

    FontFile font(resolve_font(cfg));
    LetterClassifier classifier = shared_classifier(cfg, font);

    std::vector<DesignCandidate> candidates;
    std::vector<json> metas;
    std::vector<fs::path> dirs;
    for (const fs::path& sc : scores) {
        json meta = json::parse(slurp(sc.string()));
        DesignCandidate c;
        c.glyph = from_svg(slurp((sc.parent_path() / "design.svg").string()));
        c.up = CasedLetter::from_char(meta.at("up").get<std::string>()[0]);
        c.down = CasedLetter::from_char(meta.at("down").get<std::string>()[0]);
        c.hyper.seed = meta.at("seed").get<uint64_t>();
        candidates.push_back(std::move(c));
        metas.push_back(std::move(meta));
        dirs.push_back(sc.parent_path());
    }
    candidates = rank_candidates(std::move(candidates), classifier);

    std::map<uint64_t, size_t> slot_by_seed;
    for (size_t i = 0; i < metas.size(); ++i)
        slot_by_seed[metas[i].at("seed").get<uint64_t>()] = i;

    json ranking = json::array();
    for (size_t rank = 0; rank < candidates.size(); ++rank) {
        size_t i = slot_by_seed.at(candidates[rank].hyper.seed);
        metas[i]["legibility"] = candidates[rank].legibility;
        metas[i]["rank"] = rank;
        spit(dirs[i] / "score.json", metas[i].dump(2) + "\n");
        json entry = metas[i];
        entry["path"] = fs::relative(dirs[i], root).string();
        ranking.push_back(entry);
    }
    spit(root / "ranking.json", ranking.dump(2) + "\n");
    std::cout << candidates.size() << " candidates re-ranked -> " << (root / "ranking.json").string()
              << "\n";
    return 0;
}

int cmd_train_classifier(const RunConfig& cfg) {
    FontFile font(resolve_font(cfg));
    std::string cache = resolve_cache(cfg.classifier_cache);
    LetterClassifier classifier = load_or_train_classifier(font, cache, kClassifierSeed);
    std::cout << "classifier (" << LetterClassifier::kClasses << " classes) at " << cache << "\n";
    return (void)classifier, 0;
}

// pull --config out of argv ahead of CLI11 so file values become the defaults
// that explicit flags then override
std::string preparse_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        std::string config_path = preparse_config_path(argc, argv);
        if (!config_path.empty()) cfg = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"rotational ambigram designer"};
    app.require_subcommand(1);
    std::string config_path_opt;
    app.add_option("--config", config_path_opt, "JSON config file; flags override its values");

    bool dry_run = false, resume = false, reuse_rotated = false, raw = false, rotate = false;
    int workers = 1;
    std::vector<std::string> stores;
    std::string render_in, render_out, rank_store;
    int render_resolution = 256;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config_path_opt, "JSON config file; flags override its values");
        c->add_option("--font", cfg.font_path, "TTF font file");
        c->add_option("--backend", cfg.backend, "classifier | analytic | http");
        c->add_option("--backend-url", cfg.backend_url, "denoiser endpoint for the http backend");
        c->add_option("--cfg-scale", cfg.cfg_scale, "classifier-free guidance scale");
        c->add_option("--classifier-cache", cfg.classifier_cache,
                      "classifier weights cache path");
        c->add_option("--out", cfg.out_dir, "output directory");
        c->add_option("--seed", cfg.hyper.seed, "master seed");
        c->add_option("--resolution", cfg.hyper.resolution, "optimization resolution");
    };
    auto add_optim = [&](CLI::App* c) {
        c->add_option("--steps-letter", cfg.hyper.steps_letter, "letter stage steps");
        c->add_option("--steps-word", cfg.hyper.steps_word, "word stage steps");
        c->add_option("--batch-augment", cfg.hyper.batch_augment, "augmented views per step");
        c->add_option("--lr", cfg.hyper.lr, "Adam learning rate");
        c->add_option("--lr-decay-to", cfg.hyper.lr_decay_to, "final lr fraction");
        c->add_option("--style-decay-to", cfg.hyper.style_decay_to, "final style weight fraction");
        c->add_option("--sigma-min", cfg.hyper.sigma_min, "noise level range low end");
        c->add_option("--sigma-max", cfg.hyper.sigma_max, "noise level range high end");
        c->add_option("--adam-eps", cfg.hyper.adam_eps, "Adam update floor");
        c->add_option("--paas-samples", cfg.hyper.paas_samples, "score samples per view");
        c->add_option("--checkpoint-every", cfg.hyper.checkpoint_every, "checkpoint cadence");
        c->add_option("--lambda-font", cfg.hyper.weights.lambda_font, "style loss weight");
        c->add_option("--lambda-const", cfg.hyper.weights.lambda_const,
                      "consistency loss weight");
        c->add_option("--word-reg", cfg.hyper.weights.word_reg, "word anchor weight");
        c->add_option("--distortion-letter", cfg.hyper.distortion_letter,
                      "perspective jitter, letter stage");
        c->add_option("--distortion-word", cfg.hyper.distortion_word,
                      "perspective jitter, word stage");
        c->add_flag("--style-in-word-stage", cfg.hyper.style_in_word_stage,
                    "keep style loss during word tuning");
        c->add_flag("--resume", resume, "continue from checkpoint.bin when present");
    };

    CLI::App* dl = app.add_subcommand("design-letter",
                                      "grid-search one letter pair over lambda/scheme/case");
    dl->add_option("a", cfg.word_a, "letter read upright");
    dl->add_option("b", cfg.word_b, "letter read after rotation");
    add_common(dl);
    add_optim(dl);
    dl->add_option("--policy", cfg.policy, "upper | lower | try-both");
    dl->add_option("--lambdas", cfg.lambdas, "lambda grid values");
    dl->add_option("--schemes", cfg.schemes, "alignment schemes to try");
    dl->add_option("--lambda-letter", cfg.hyper.weights.lambda_letter,
                   "orientation mix (fixed-hyper runs)");
    dl->add_option("--workers", workers, "parallel grid workers");
    dl->add_flag("--dry-run", dry_run, "print the resolved grid and exit");

    CLI::App* dw = app.add_subcommand("design-word", "jointly tune stored glyphs into a word");
    dw->add_option("word_a", cfg.word_a, "word read upright");
    dw->add_option("word_b", cfg.word_b, "word read after rotation");
    add_common(dw);
    add_optim(dw);
    dw->add_option("--policy", cfg.policy, "upper | lower | try-both");
    dw->add_option("--lambda-letter", cfg.hyper.weights.lambda_letter, "orientation mix");
    dw->add_option("--store", stores, "design-letter output roots to source glyphs from");
    dw->add_option("--font-map", cfg.font_map_dir, "directory of <A><B>.svg glyphs");

    CLI::App* bm = app.add_subcommand("benchmark", "word accuracy under an OCR adapter");
    add_common(bm);
    bm->add_option("--words", cfg.words_path, "word list, one per line");
    bm->add_option("--words-sha256", cfg.words_sha256, "expected word list hash");
    bm->add_option("--ocr", cfg.ocr, "stub | classifier-grid");
    bm->add_option("--font-map", cfg.font_map_dir, "directory of <A><B>.svg glyphs");
    bm->add_flag("--reuse-rotated", reuse_rotated, "fill missing (a,b) with rotated (b,a)");

    CLI::App* rd = app.add_subcommand("render", "rasterize a design SVG to PNG");
    rd->add_option("input", render_in, "SVG path")->required();
    rd->add_option("output", render_out, "PNG path")->required();
    rd->add_option("--resolution", render_resolution, "pixels per unit cell");
    rd->add_flag("--rotate", rotate, "render the 180 degree reading");
    rd->add_flag("--raw", raw, "skip postprocessing");

    CLI::App* rk = app.add_subcommand("rank", "recompute legibility ranking of a store");
    add_common(rk);
    rk->add_option("--store", rank_store, "candidate store root");

    CLI::App* tc = app.add_subcommand("train-classifier", "build the classifier weight cache");
    add_common(tc);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dl->parsed()) return cmd_design_letter(cfg, dry_run, resume, workers);
        if (dw->parsed()) return cmd_design_word(cfg, stores, resume);
        if (bm->parsed()) return cmd_benchmark(cfg, reuse_rotated);
        if (rd->parsed()) return cmd_render(render_in, render_out, render_resolution, rotate, raw);
        if (rk->parsed()) return cmd_rank(cfg, rank_store);
        if (tc->parsed()) return cmd_train_classifier(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
