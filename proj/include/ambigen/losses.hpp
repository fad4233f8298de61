#pragma once

#include <string>
#include <vector>

#include "ambigen/geometry.hpp"
#include "ambigen/guidance.hpp"
#include "ambigen/raster.hpp"

namespace ambigen {

struct LossWeights {
    double lambda_letter = 0.5;  // balance between upright and rotated legibility
    double lambda_font = 0.0;
    double lambda_const = 0.0;
    double word_reg = 0.0;

    // lambda_letter must lie in [0,1], the rest must be nonnegative
    void validate() const;
};

// Legibility ascent direction for a single glyph raster:
//   lambda * paas(x, sigma, c_up) + (1-lambda) * R180(paas(R180(x), sigma, c_down))
// An orientation whose weight is exactly 0 is skipped, not just zeroed.
// Linear in lambda for a fixed seed. Consumed as -gradient by a minimizer.
Raster letter_gradient(const Raster& x, const ConditioningEmbedding& c_up,
                       const ConditioningEmbedding& c_down, double lambda_letter,
                       GuidanceBackend& backend, double sigma, uint64_t seed,
                       int n_samples = 1);

// Same direction for a two-glyph raster (width = 2 * height), both
// orientations weighted equally. c_up conditions the upright pair, c_down the
// pair read after rotating the page.
Raster word_gradient(const Raster& pair_x, const ConditioningEmbedding& c_up,
                     const ConditioningEmbedding& c_down, GuidanceBackend& backend, double sigma,
                     uint64_t seed, int n_samples = 1);

// Maps a raster to a fixed-size attribute vector with a linearization for
// gradient flow back to pixels.
class FontAttributePredictor {
  public:
    virtual ~FontAttributePredictor() = default;
    virtual int dimension() const = 0;
    virtual std::vector<double> predict(const Raster& img) const = 0;
    // Accumulates d(loss)/d(pixels) from d(loss)/d(attributes).
    virtual Raster predict_backward(const Raster& img,
                                    const std::vector<double>& attr_grad) const = 0;
};

// Normalized geometric moments of the ink: mass, first and second moments of
// the pixel-center coordinates weighted by ink. Linear in the image.
class MomentAttributePredictor : public FontAttributePredictor {
  public:
    int dimension() const override { return 6; }
    std::vector<double> predict(const Raster& img) const override;
    Raster predict_backward(const Raster& img, const std::vector<double>& attr_grad) const override;
};

struct StyleTarget {
    std::vector<std::vector<double>> attributes;
};

class FontFile;
// Attribute vectors of every rendered letter of the reference font, both cases.
StyleTarget style_from_font(const FontFile& font, const FontAttributePredictor& predictor,
                            int resolution);

struct ScalarLoss {
    double value = 0;
    std::vector<Raster> image_grads;  // aligned with the input raster list
};

// Sum over glyphs of ||v - A(x)||^2 with v drawn uniformly from the style set,
// one draw per glyph per call.
ScalarLoss font_loss(const std::vector<Raster>& glyph_rasters,
                     const FontAttributePredictor& predictor, const StyleTarget& style,
                     uint64_t seed);

// Self-similarity across the word: glyph n rotated should match glyph N-1-n
// (0-based), compared after a 3x3 binomial blur. Only defined when the two
// reading directions spell the same word.
ScalarLoss consistency_loss(const std::vector<Raster>& glyph_rasters, const std::string& word_a,
                            const std::string& word_b);

struct PointLoss {
    double value = 0;
    std::vector<double> point_grads;  // flatten_points layout of the sequence
};

// weight * mean squared control-point displacement from the anchor.
PointLoss word_deviation_reg(const GlyphSequence& current, const GlyphSequence& anchor,
                             double weight);

} // namespace ambigen
