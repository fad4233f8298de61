#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ambigen/adam.hpp"
#include "ambigen/classifier.hpp"
#include "ambigen/font.hpp"
#include "ambigen/guidance.hpp"
#include "ambigen/layout.hpp"
#include "ambigen/losses.hpp"
#include "ambigen/raster.hpp"

namespace ambigen {

struct HyperParams {
    LossWeights weights;
    AlignmentScheme scheme = AlignmentScheme::Naive;
    int steps_letter = 500;
    int steps_word = 110;
    int batch_augment = 5;
    double distortion_letter = 0.3;
    double distortion_word = 0.2;
    double lr = 1e-2;
    // Both schedules decay exponentially to this fraction of the initial
    // value over their stage.
    double lr_decay_to = 0.1;
    double style_decay_to = 0.1;
    double sigma_min = 0.3;
    double sigma_max = 0.7;
    // Update floor: gradients far below this scale produce proportionally
    // small steps instead of full-size normalized ones, so a design the
    // guidance is already confident about stays put.
    double adam_eps = 1e-3;
    int paas_samples = 1;
    int resolution = 64;
    int checkpoint_every = 100;
    bool style_in_word_stage = false;
    uint64_t seed = 0;

    void validate() const;
    double lr_at(int step, int total) const;
    double style_weight_at(int step, int total) const;
};

// Optimizer snapshot; enough to resume a run deterministically since every
// step reseeds from (seed, step).
struct OptState {
    int step = 0;
    std::vector<double> params;
    Adam adam;
};

using CheckpointFn = std::function<void(const OptState&)>;

void save_checkpoint(const OptState& state, const std::string& path);
OptState load_checkpoint(const std::string& path);

struct DesignCandidate {
    Glyph glyph;
    HyperParams hyper;
    CasedLetter up{'A', Case::Upper};
    CasedLetter down{'A', Case::Upper};
    // classifier cross-entropy summed over both orientations, set by ranking
    double legibility = 0;
};

// Gradient ascent on legibility of one glyph that reads as `up` upright and
// as `down` after rotating the page. Deterministic given hyper.seed.
Glyph optimize_letter(const CasedLetter& up, const CasedLetter& down, const FontFile& font,
                      const HyperParams& hyper, GuidanceBackend& backend,
                      const FontAttributePredictor* predictor = nullptr,
                      const StyleTarget* style = nullptr, const CheckpointFn& checkpoint = {},
                      const OptState* resume = nullptr);

// Median passes then unsharp masking then clamp; drops isolated floaters.
Raster postprocess(const Raster& img, int median_passes = 2, double unsharp_amount = 1.0);

// Fills each candidate's legibility with the classifier cross-entropy of its
// postprocessed render, upright scored as `up` and rotated as `down`, then
// sorts ascending. Stable.
std::vector<DesignCandidate> rank_candidates(std::vector<DesignCandidate> candidates,
                                             const LetterClassifier& classifier);

struct GridSpec {
    std::vector<double> lambdas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<AlignmentScheme> schemes = {AlignmentScheme::Naive, AlignmentScheme::MaxOverlap,
                                            AlignmentScheme::ContactLeft,
                                            AlignmentScheme::ContactRight};
    CasePolicy policy = CasePolicy::TryBoth;

    // upright/rotated case combinations the policy allows
    std::vector<std::pair<Case, Case>> case_combos() const;
    size_t cell_count() const { return lambdas.size() * schemes.size() * case_combos().size(); }
};

struct GridFailure {
    std::string cell;
    std::string message;
};

struct GridResult {
    std::vector<DesignCandidate> candidates;  // ranked
    std::vector<GridFailure> failures;
};

// One optimize_letter run per grid cell, independently seeded; failures are
// recorded and the grid keeps going.
GridResult grid_search(char a, char b, const GridSpec& grid, const FontFile& font,
                       const HyperParams& base, GuidanceBackend& backend,
                       const LetterClassifier& ranker,
                       const FontAttributePredictor* predictor = nullptr,
                       const StyleTarget* style = nullptr);

// Case choices for both readings of a word, one entry per position.
struct WordCases {
    std::vector<Case> up;
    std::vector<Case> down;
};

// Joint tuning of all glyphs with pairwise legibility plus an anchor
// regularizer. Glyphs come in word order, already designed per letter; the
// result is laid out on the [0,N]x[0,1] word canvas.
GlyphSequence optimize_word(const AmbigramTask& task, const std::vector<Glyph>& letter_glyphs,
                            const HyperParams& hyper, GuidanceBackend& backend,
                            const WordCases* cases = nullptr,
                            const FontAttributePredictor* predictor = nullptr,
                            const StyleTarget* style = nullptr, const CheckpointFn& checkpoint = {},
                            const OptState* resume = nullptr);

// Ordered (upright, rotated) letter pair to glyph, complete over A-Z x A-Z.
class AmbigramFontMap {
  public:
    static constexpr int kLetters = 26;

    const Glyph& get(char a, char b) const;
    void set(char a, char b, Glyph g);
    bool has(char a, char b) const;
    size_t size() const;

  private:
    std::array<std::optional<Glyph>, kLetters * kLetters> glyphs_;
};

// Requires all 676 pairs unless reuse_rotated, in which case a missing (b,a)
// is filled with the rotated glyph of a present (a,b).
AmbigramFontMap assemble_font(const std::map<std::pair<char, char>, DesignCandidate>& best,
                              bool reuse_rotated = false);

// Ablation: the same schedule as optimize_letter but the parameters are the
// pixels themselves, clamped to [0,1] after every step. Starts from gray.
Raster optimize_pixels(const CasedLetter& up, const CasedLetter& down, const HyperParams& hyper,
                       GuidanceBackend& backend);

} // namespace ambigen
