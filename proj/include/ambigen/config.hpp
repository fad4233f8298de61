#pragma once

#include <string>
#include <vector>

#include "ambigen/pipeline.hpp"

namespace ambigen {

// Everything a run needs, resolvable from defaults, a JSON config document,
// and command-line flags, in ascending precedence.
struct RunConfig {
    std::string word_a;
    std::string word_b;
    std::string policy = "try-both";  // upper | lower | try-both

    std::string font_path;  // empty means the system font

    std::string backend = "classifier";  // classifier | analytic | http
    std::string backend_url;
    double cfg_scale = 1.0;
    std::string classifier_cache = "classifier.bin";

    HyperParams hyper;
    std::vector<double> lambdas;        // empty means the default grid
    std::vector<std::string> schemes;   // empty means all four

    std::string out_dir = "out";
    std::string words_path;
    std::string words_sha256;
    std::string ocr = "stub";  // stub | classifier-grid
    std::string font_map_dir;
    std::string store_dir;

    RunConfig() { hyper.weights.word_reg = 1.0; }

    CasePolicy case_policy() const;
    GridSpec grid_spec() const;
    void validate() const;
};

// Strict parse: unknown fields are errors, values are type-checked.
RunConfig load_config(const std::string& json_path);
void apply_config_text(RunConfig& cfg, const std::string& json_text, const std::string& origin);

} // namespace ambigen
