#include "ambigen/losses.hpp"

#include <cmath>

#include "ambigen/errors.hpp"
#include "ambigen/font.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/letters.hpp"
#include "ambigen/rng.hpp"

namespace ambigen {

void LossWeights::validate() const {
    if (!(lambda_letter >= 0 && lambda_letter <= 1))
        throw ConfigError("lambda_letter must be in [0,1], got " + std::to_string(lambda_letter));
    if (!(lambda_font >= 0) || !(lambda_const >= 0) || !(word_reg >= 0))
        throw ConfigError("loss weights must be nonnegative");
}

namespace {

// Both orientations share the call signature; seeds are fixed per orientation
// so the mix is linear in the weight.
Raster orientation_mix(const Raster& x, const ConditioningEmbedding& c_up,
                       const ConditioningEmbedding& c_down, double w_up, double w_down,
                       GuidanceBackend& backend, double sigma, uint64_t seed, int n_samples) {
    Raster out(x.height, x.width);
    if (w_up != 0) {
        Raster up = paas(x, sigma, c_up, backend, n_samples, derive_seed(seed, {0x7570}));
        for (size_t i = 0; i < out.ink.size(); ++i) out.ink[i] += w_up * up.ink[i];
    }
    if (w_down != 0) {
        Raster turned = rotate180(x);
        Raster down =
            paas(turned, sigma, c_down, backend, n_samples, derive_seed(seed, {0x646f776e}));
        Raster back = rotate180(down);
        for (size_t i = 0; i < out.ink.size(); ++i) out.ink[i] += w_down * back.ink[i];
    }
    return out;
}

} // namespace

Raster letter_gradient(const Raster& x, const ConditioningEmbedding& c_up,
                       const ConditioningEmbedding& c_down, double lambda_letter,
                       GuidanceBackend& backend, double sigma, uint64_t seed, int n_samples) {
    if (!(lambda_letter >= 0 && lambda_letter <= 1))
        throw ConfigError("lambda_letter must be in [0,1], got " + std::to_string(lambda_letter));
    return orientation_mix(x, c_up, c_down, lambda_letter, 1 - lambda_letter, backend, sigma, seed,
                           n_samples);
}

Raster word_gradient(const Raster& pair_x, const ConditioningEmbedding& c_up,
                     const ConditioningEmbedding& c_down, GuidanceBackend& backend, double sigma,
                     uint64_t seed, int n_samples) {
    if (pair_x.width != 2 * pair_x.height)
        throw ShapeMismatch("pair raster must be twice as wide as tall, got " +
                            std::to_string(pair_x.height) + "x" + std::to_string(pair_x.width));
    return orientation_mix(pair_x, c_up, c_down, 1, 1, backend, sigma, seed, n_samples);
}

std::vector<double> MomentAttributePredictor::predict(const Raster& img) const {
    if (img.size() == 0) throw EmptyImage("attribute predictor got an empty raster");
    double inv = 1.0 / double(img.size());
    std::vector<double> a(6, 0);
    for (int y = 0; y < img.height; ++y) {
        double v = (y + 0.5) / img.height;
        for (int x = 0; x < img.width; ++x) {
            double u = (x + 0.5) / img.width;
            double w = img.at(y, x) * inv;
            a[0] += w;
            a[1] += w * u;
            a[2] += w * v;
            a[3] += w * u * u;
            a[4] += w * v * v;
            a[5] += w * u * v;
        }
    }
    return a;
}

Raster MomentAttributePredictor::predict_backward(const Raster& img,
                                                  const std::vector<double>& attr_grad) const {
    if (int(attr_grad.size()) != dimension())
        throw DimensionMismatch("attribute gradient has " + std::to_string(attr_grad.size()) +
                                " entries, predictor expects " + std::to_string(dimension()));
    Raster g(img.height, img.width);
    double inv = 1.0 / double(img.size());
    for (int y = 0; y < img.height; ++y) {
        double v = (y + 0.5) / img.height;
        for (int x = 0; x < img.width; ++x) {
            double u = (x + 0.5) / img.width;
            g.at(y, x) = inv * (attr_grad[0] + attr_grad[1] * u + attr_grad[2] * v +
                                attr_grad[3] * u * u + attr_grad[4] * v * v + attr_grad[5] * u * v);
        }
    }
    return g;
}

StyleTarget style_from_font(const FontFile& font, const FontAttributePredictor& predictor,
                            int resolution) {
    StyleTarget style;
    RasterizeOptions opt;
    opt.resolution = resolution;
    for (int c = 0; c < 26; ++c) {
        for (Case cs : {Case::Upper, Case::Lower}) {
            CasedLetter letter{char('A' + c), cs};
            Glyph g = load_font_glyph(font, letter);
            style.attributes.push_back(predictor.predict(rasterize(g, opt).image));
        }
    }
    return style;
}

ScalarLoss font_loss(const std::vector<Raster>& glyph_rasters,
                     const FontAttributePredictor& predictor, const StyleTarget& style,
                     uint64_t seed) {
    if (style.attributes.empty()) throw ConfigError("style target has no attribute vectors");
    for (const auto& v : style.attributes)
        if (int(v.size()) != predictor.dimension())
            throw DimensionMismatch("style vector has " + std::to_string(v.size()) +
                                    " entries, predictor expects " +
                                    std::to_string(predictor.dimension()));
    Rng rng(derive_seed(seed, {0x666f6e74}));
    ScalarLoss out;
    for (const Raster& x : glyph_rasters) {
        const std::vector<double>& v = style.attributes[rng.below(style.attributes.size())];
        std::vector<double> a = predictor.predict(x);
        std::vector<double> attr_grad(a.size());
        for (size_t i = 0; i < a.size(); ++i) {
            double r = v[i] - a[i];
            out.value += r * r;
            attr_grad[i] = -2 * r;
        }
        out.image_grads.push_back(predictor.predict_backward(x, attr_grad));
    }
    return out;
}

ScalarLoss consistency_loss(const std::vector<Raster>& glyph_rasters, const std::string& word_a,
                            const std::string& word_b) {
    if (word_a != word_b)
        throw AppliedToAsymmetricTask("consistency applies only when both readings are \"" +
                                      word_a + "\" vs \"" + word_b + "\"");
    size_t n_glyphs = glyph_rasters.size();
    ScalarLoss out;
    for (const Raster& x : glyph_rasters) out.image_grads.emplace_back(x.height, x.width);
    for (size_t n = 0; n < n_glyphs; ++n) {
        size_t m = n_glyphs - 1 - n;
        Raster lhs = blur3(glyph_rasters[m]);
        Raster rhs = blur3(rotate180(glyph_rasters[n]));
        if (lhs.size() != rhs.size())
            throw ShapeMismatch("glyph rasters in a word must share a shape");
        Raster diff(lhs.height, lhs.width);
        for (size_t i = 0; i < diff.ink.size(); ++i) {
            diff.ink[i] = lhs.ink[i] - rhs.ink[i];
            out.value += diff.ink[i] * diff.ink[i];
        }
        // blur is self-adjoint and rotation is its own inverse
        Raster bd = blur3(diff);
        for (size_t i = 0; i < bd.ink.size(); ++i) out.image_grads[m].ink[i] += 2 * bd.ink[i];
        Raster rbd = rotate180(bd);
        for (size_t i = 0; i < rbd.ink.size(); ++i) out.image_grads[n].ink[i] -= 2 * rbd.ink[i];
    }
    return out;
}

PointLoss word_deviation_reg(const GlyphSequence& current, const GlyphSequence& anchor,
                             double weight) {
    if (current.glyphs.size() != anchor.glyphs.size())
        throw TopologyMismatch("sequences have different glyph counts");
    for (size_t g = 0; g < current.glyphs.size(); ++g) {
        const auto& cp = current.glyphs[g].paths;
        const auto& ap = anchor.glyphs[g].paths;
        if (cp.size() != ap.size())
            throw TopologyMismatch("glyph " + std::to_string(g) + " path counts differ");
        for (size_t p = 0; p < cp.size(); ++p)
            if (cp[p].pts.size() != ap[p].pts.size())
                throw TopologyMismatch("glyph " + std::to_string(g) + " path " +
                                       std::to_string(p) + " point counts differ");
    }
    std::vector<double> c = flatten_points(current);
    std::vector<double> a = flatten_points(anchor);
    size_t n_points = c.size() / 2;
    PointLoss out;
    out.point_grads.assign(c.size(), 0);
    if (n_points == 0) return out;
    for (size_t i = 0; i < c.size(); ++i) {
        double d = c[i] - a[i];
        out.value += d * d;
        out.point_grads[i] = weight * 2 * d / double(n_points);
    }
    out.value *= weight / double(n_points);
    return out;
}

} // namespace ambigen
