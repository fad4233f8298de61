#include "ambigen/config.hpp"

#include <fstream>

#include <json.hpp>

#include "ambigen/errors.hpp"

namespace ambigen {

CasePolicy RunConfig::case_policy() const {
    if (policy == "upper") return CasePolicy::Upper;
    if (policy == "lower") return CasePolicy::Lower;
    if (policy == "try-both") return CasePolicy::TryBoth;
    throw ConfigError("policy must be upper, lower or try-both, got \"" + policy + "\"");
}

GridSpec RunConfig::grid_spec() const {
    GridSpec grid;
    if (!lambdas.empty()) grid.lambdas = lambdas;
    if (!schemes.empty()) {
        grid.schemes.clear();
        for (const std::string& s : schemes) grid.schemes.push_back(scheme_from_name(s));
    }
    grid.policy = case_policy();
    return grid;
}

void RunConfig::validate() const {
    hyper.validate();
    case_policy();
    for (double l : lambdas)
        if (!(l >= 0 && l <= 1)) throw ConfigError("grid lambdas must be in [0,1]");
    for (const std::string& s : schemes) scheme_from_name(s);
    if (backend != "classifier" && backend != "analytic" && backend != "http")
        throw ConfigError("backend must be classifier, analytic or http, got \"" + backend + "\"");
    if (backend == "http" && backend_url.empty())
        throw ConfigError("http backend needs backend_url");
    if (ocr != "stub" && ocr != "classifier-grid")
        throw ConfigError("unknown ocr adapter \"" + ocr + "\"; available: stub, classifier-grid");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

namespace {

using nlohmann::json;

double want_number(const json& v, const std::string& key, const std::string& origin) {
    if (!v.is_number()) throw ConfigError(origin + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

std::string want_string(const json& v, const std::string& key, const std::string& origin) {
    if (!v.is_string()) throw ConfigError(origin + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

bool want_bool(const json& v, const std::string& key, const std::string& origin) {
    if (!v.is_boolean()) throw ConfigError(origin + ": field \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

int want_int(const json& v, const std::string& key, const std::string& origin) {
    if (!v.is_number_integer())
        throw ConfigError(origin + ": field \"" + key + "\" must be an integer");
    return v.get<int>();
}

} // namespace

void apply_config_text(RunConfig& cfg, const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": config must be a JSON object");

    for (const auto& [key, v] : doc.items()) {
        if (key == "word_a") cfg.word_a = want_string(v, key, origin);
        else if (key == "word_b") cfg.word_b = want_string(v, key, origin);
        else if (key == "policy") cfg.policy = want_string(v, key, origin);
        else if (key == "font") cfg.font_path = want_string(v, key, origin);
        else if (key == "backend") cfg.backend = want_string(v, key, origin);
        else if (key == "backend_url") cfg.backend_url = want_string(v, key, origin);
        else if (key == "cfg_scale") cfg.cfg_scale = want_number(v, key, origin);
        else if (key == "classifier_cache") cfg.classifier_cache = want_string(v, key, origin);
        else if (key == "out") cfg.out_dir = want_string(v, key, origin);
        else if (key == "seed") cfg.hyper.seed = uint64_t(want_number(v, key, origin));
        else if (key == "steps_letter") cfg.hyper.steps_letter = want_int(v, key, origin);
        else if (key == "steps_word") cfg.hyper.steps_word = want_int(v, key, origin);
        else if (key == "batch_augment") cfg.hyper.batch_augment = want_int(v, key, origin);
        else if (key == "lr") cfg.hyper.lr = want_number(v, key, origin);
        else if (key == "lr_decay_to") cfg.hyper.lr_decay_to = want_number(v, key, origin);
        else if (key == "style_decay_to") cfg.hyper.style_decay_to = want_number(v, key, origin);
        else if (key == "sigma_min") cfg.hyper.sigma_min = want_number(v, key, origin);
        else if (key == "sigma_max") cfg.hyper.sigma_max = want_number(v, key, origin);
        else if (key == "adam_eps") cfg.hyper.adam_eps = want_number(v, key, origin);
        else if (key == "paas_samples") cfg.hyper.paas_samples = want_int(v, key, origin);
        else if (key == "resolution") cfg.hyper.resolution = want_int(v, key, origin);
        else if (key == "checkpoint_every") cfg.hyper.checkpoint_every = want_int(v, key, origin);
        else if (key == "lambda_letter")
            cfg.hyper.weights.lambda_letter = want_number(v, key, origin);
        else if (key == "lambda_font") cfg.hyper.weights.lambda_font = want_number(v, key, origin);
        else if (key == "lambda_const")
            cfg.hyper.weights.lambda_const = want_number(v, key, origin);
        else if (key == "word_reg") cfg.hyper.weights.word_reg = want_number(v, key, origin);
        else if (key == "distortion_letter")
            cfg.hyper.distortion_letter = want_number(v, key, origin);
        else if (key == "distortion_word")
            cfg.hyper.distortion_word = want_number(v, key, origin);
        else if (key == "style_in_word_stage")
            cfg.hyper.style_in_word_stage = want_bool(v, key, origin);
        else if (key == "scheme") cfg.hyper.scheme = scheme_from_name(want_string(v, key, origin));
        else if (key == "lambdas") {
            if (!v.is_array()) throw ConfigError(origin + ": \"lambdas\" must be an array");
            cfg.lambdas.clear();
            for (const auto& e : v) cfg.lambdas.push_back(want_number(e, key, origin));
        } else if (key == "schemes") {
            if (!v.is_array()) throw ConfigError(origin + ": \"schemes\" must be an array");
            cfg.schemes.clear();
            for (const auto& e : v) cfg.schemes.push_back(want_string(e, key, origin));
        } else if (key == "words") cfg.words_path = want_string(v, key, origin);
        else if (key == "words_sha256") cfg.words_sha256 = want_string(v, key, origin);
        else if (key == "ocr") cfg.ocr = want_string(v, key, origin);
        else if (key == "font_map") cfg.font_map_dir = want_string(v, key, origin);
        else if (key == "store") cfg.store_dir = want_string(v, key, origin);
        else throw ConfigError(origin + ": unknown config field \"" + key + "\"");
    }
}

RunConfig load_config(const std::string& json_path) {
    std::ifstream in(json_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config at " + json_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    RunConfig cfg;
    apply_config_text(cfg, text, json_path);
    return cfg;
}

} // namespace ambigen
