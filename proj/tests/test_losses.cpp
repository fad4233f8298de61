#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/losses.hpp"
#include "helpers.hpp"

using namespace ambigen;

namespace {

Raster random_image(int h, int w, uint64_t seed) {
    Raster img(h, w);
    Rng rng(seed);
    for (double& v : img.ink) v = rng.uniform();
    return img;
}

// counts denoise calls so tests can observe the exact-zero-weight skip
class CountingBackend : public GuidanceBackend {
  public:
    explicit CountingBackend(Raster mean) : inner_(std::move(mean), 1.0) {}
    std::string id() const override { return inner_.id(); }
    int native_resolution() const override { return inner_.native_resolution(); }
    ConditioningEmbedding embed(const std::string& prompt) override {
        return inner_.embed(prompt);
    }
    Raster denoise(const Raster& x, double sigma, const ConditioningEmbedding& c) override {
        ++calls;
        return inner_.denoise(x, sigma, c);
    }
    int calls = 0;

  private:
    AnalyticGaussianBackend inner_;
};

} // namespace

TEST_CASE("loss weights validate their ranges") {
    LossWeights w;
    w.validate();
    w.lambda_letter = 1.5;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w.lambda_letter = 0.5;
    w.lambda_font = -0.1;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("letter gradient is linear in lambda for a fixed seed") {
    Raster mu = random_image(16, 16, 1);
    AnalyticGaussianBackend be(mu, 1.0);
    auto cu = be.embed("up");
    auto cd = be.embed("down");
    Raster x = random_image(16, 16, 2);
    Raster g0 = letter_gradient(x, cu, cd, 0.0, be, 0.8, 5);
    Raster g1 = letter_gradient(x, cu, cd, 1.0, be, 0.8, 5);
    Raster gm = letter_gradient(x, cu, cd, 0.4, be, 0.8, 5);
    for (size_t i = 0; i < x.size(); ++i)
        CHECK(gm.ink[i] ==
              doctest::Approx(0.4 * g1.ink[i] + 0.6 * g0.ink[i]).epsilon(1e-9));
}

TEST_CASE("an exactly zero orientation weight skips its backend call") {
    CountingBackend be(random_image(16, 16, 3));
    auto cu = be.embed("up");
    auto cd = be.embed("down");
    Raster x = random_image(16, 16, 4);
    letter_gradient(x, cu, cd, 1.0, be, 0.5, 7, 1);
    CHECK(be.calls == 1);  // only the upright call
    be.calls = 0;
    letter_gradient(x, cu, cd, 0.0, be, 0.5, 7, 1);
    CHECK(be.calls == 1);  // only the rotated call
    be.calls = 0;
    letter_gradient(x, cu, cd, 0.5, be, 0.5, 7, 1);
    CHECK(be.calls == 2);
}

TEST_CASE("rotated orientation really sees the rotated image") {
    // with lambda 0, gradient = R180(paas(R180(x), c_down)); verify against a
    // hand-rolled evaluation
    Raster mu = random_image(16, 16, 5);
    AnalyticGaussianBackend be(mu, 1.0);
    auto cd = be.embed("down");
    auto cu = be.embed("up");
    Raster x = random_image(16, 16, 6);
    Raster got = letter_gradient(x, cu, cd, 0.0, be, 1.0, 40000);
    // closed form of the expectation: (mu - R180(x)) / 2, rotated back
    Raster rx = rotate180(x);
    Raster expect(16, 16);
    for (size_t i = 0; i < x.size(); ++i) expect.ink[i] = (mu.ink[i] - rx.ink[i]) / 2;
    expect = rotate180(expect);
    // Monte Carlo with n=1, so compare loosely through many seeds averaged
    Raster avg(16, 16);
    int reps = 600;
    for (int r = 0; r < reps; ++r) {
        Raster g = letter_gradient(x, cu, cd, 0.0, be, 1.0, uint64_t(r) * 7919 + 1);
        for (size_t i = 0; i < avg.size(); ++i) avg.ink[i] += g.ink[i] / reps;
    }
    double num = 0, den = 0;
    for (size_t i = 0; i < avg.size(); ++i) {
        num += (avg.ink[i] - expect.ink[i]) * (avg.ink[i] - expect.ink[i]);
        den += expect.ink[i] * expect.ink[i];
    }
    CHECK(std::sqrt(num / den) < 0.25);
    (void)got;
}

TEST_CASE("word gradient validates the pair shape") {
    Raster mu = random_image(16, 16, 7);
    AnalyticGaussianBackend be(mu, 1.0);
    auto cu = be.embed("up");
    auto cd = be.embed("down");
    Raster square = random_image(16, 16, 8);
    CHECK_THROWS_AS(word_gradient(square, cu, cd, be, 0.5, 1), ShapeMismatch);
    Raster pair = random_image(16, 32, 9);
    Raster g = word_gradient(pair, cu, cd, be, 0.5, 1);
    CHECK(g.width == 32);
    CHECK(g.height == 16);
}

TEST_CASE("moment predictor is linear with an adjoint backward") {
    MomentAttributePredictor pred;
    CHECK(pred.dimension() == 6);
    Raster a = random_image(20, 20, 10);
    Raster b = random_image(20, 20, 11);
    auto va = pred.predict(a);
    auto vb = pred.predict(b);
    Raster sum(20, 20);
    for (size_t i = 0; i < a.size(); ++i) sum.ink[i] = a.ink[i] + b.ink[i];
    auto vs = pred.predict(sum);
    for (int k = 0; k < 6; ++k) CHECK(vs[k] == doctest::Approx(va[k] + vb[k]).epsilon(1e-9));

    // adjoint: <A(x), u> == <x, A^T(u)> for linear A
    std::vector<double> u = {0.3, -1.0, 0.5, 2.0, -0.25, 0.8};
    Raster back = pred.predict_backward(a, u);
    double lhs = 0;
    for (int k = 0; k < 6; ++k) lhs += va[k] * u[k];
    double rhs = 0;
    for (size_t i = 0; i < a.size(); ++i) rhs += a.ink[i] * back.ink[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}

TEST_CASE("font loss pulls attributes toward a drawn style target") {
    MomentAttributePredictor pred;
    StyleTarget style;
    style.attributes.push_back({2.0, 0.5, 0.5, 0.3, 0.3, 0.25});  // single target
    Raster x = random_image(16, 16, 12);
    ScalarLoss loss = font_loss({x}, pred, style, 99);
    REQUIRE(loss.image_grads.size() == 1);

    auto v = pred.predict(x);
    double expect = 0;
    for (int k = 0; k < 6; ++k)
        expect += (style.attributes[0][k] - v[k]) * (style.attributes[0][k] - v[k]);
    CHECK(loss.value == doctest::Approx(expect).epsilon(1e-12));

    // finite difference the loss through a pixel
    double h = 1e-6;
    Raster xp = x, xm = x;
    xp.ink[40] += h;
    xm.ink[40] -= h;
    double fd = (font_loss({xp}, pred, style, 99).value -
                 font_loss({xm}, pred, style, 99).value) /
                (2 * h);
    CHECK(fd == doctest::Approx(loss.image_grads[0].ink[40]).epsilon(1e-4));
}

TEST_CASE("style targets cover all 52 rendered letters") {
    MomentAttributePredictor pred;
    StyleTarget style = style_from_font(testutil::font(), pred, 32);
    CHECK(style.attributes.size() == 52);
    for (const auto& v : style.attributes) {
        REQUIRE(v.size() == 6);
        CHECK(v[0] > 0);  // every letter has ink
    }
}

TEST_CASE("consistency loss vanishes when rotation symmetry holds") {
    Rng rng(13);
    Raster a = random_image(16, 16, 14);
    Raster b = rotate180(a);  // glyph 1 is exactly glyph 0 rotated
    ScalarLoss sym = consistency_loss({a, b}, "OS", "OS");
    CHECK(sym.value == doctest::Approx(0.0).epsilon(1e-15));
    for (const Raster& g : sym.image_grads)
        for (double v : g.ink) CHECK(std::fabs(v) <= 1e-12);

    Raster c = random_image(16, 16, 15);
    ScalarLoss asym = consistency_loss({a, c}, "OS", "OS");
    CHECK(asym.value > 0);

    CHECK_THROWS_AS(consistency_loss({a, b}, "OS", "SO"), AppliedToAsymmetricTask);
}

TEST_CASE("consistency gradient passes finite differences") {
    Raster a = random_image(12, 12, 16);
    Raster b = random_image(12, 12, 17);
    ScalarLoss loss = consistency_loss({a, b}, "NN", "NN");
    double h = 1e-6;
    for (size_t j : {size_t(5), size_t(77), size_t(130)}) {
        Raster ap = a, am = a;
        ap.ink[j] += h;
        am.ink[j] -= h;
        double fd = (consistency_loss({ap, b}, "NN", "NN").value -
                     consistency_loss({am, b}, "NN", "NN").value) /
                    (2 * h);
        CHECK(fd == doctest::Approx(loss.image_grads[0].ink[j]).epsilon(1e-4));
    }
}

TEST_CASE("word deviation regularizer measures mean point displacement") {
    Rng rng(18);
    GlyphSequence anchor;
    anchor.glyphs.push_back(testutil::random_glyph(rng, false));
    anchor.placements.push_back({1.0, {0, 0}});
    GlyphSequence cur = anchor;
    auto flat = flatten_points(cur);
    for (double& v : flat) v += 0.02;
    apply_points(cur, flat);

    PointLoss loss = word_deviation_reg(cur, anchor, 2.0);
    size_t P = flat.size() / 2;
    CHECK(loss.value == doctest::Approx(2.0 * (P * 2 * 0.02 * 0.02) / P).epsilon(1e-9));
    REQUIRE(loss.point_grads.size() == flat.size());
    for (double g : loss.point_grads)
        CHECK(g == doctest::Approx(2.0 * 2 * 0.02 / double(P)).epsilon(1e-9));

    GlyphSequence wrong = anchor;
    wrong.glyphs[0].paths[0].pts.push_back({0, 0});
    wrong.glyphs[0].paths[0].pts.push_back({0, 0});
    wrong.glyphs[0].paths[0].pts.push_back({0, 0});
    CHECK_THROWS_AS(word_deviation_reg(wrong, anchor, 1.0), TopologyMismatch);
}
