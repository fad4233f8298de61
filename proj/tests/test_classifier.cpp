#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "ambigen/classifier.hpp"
#include "ambigen/errors.hpp"
#include "ambigen/raster.hpp"
#include "helpers.hpp"

using namespace ambigen;

TEST_CASE("class index and letter round-trip over all 52 classes") {
    for (int i = 0; i < LetterClassifier::kClasses; ++i) {
        CasedLetter cl = LetterClassifier::class_letter(i);
        CHECK(LetterClassifier::class_index(cl) == i);
    }
    CHECK(LetterClassifier::class_index({'A', Case::Upper}) == 0);
    CHECK(LetterClassifier::class_index({'Z', Case::Upper}) == 25);
    CHECK(LetterClassifier::class_index({'A', Case::Lower}) == 26);
    CHECK_THROWS_AS(LetterClassifier::class_letter(52), ConfigError);
}

TEST_CASE("probabilities form a distribution") {
    const LetterClassifier& clf = testutil::classifier();
    Raster img = rasterize(load_font_glyph(testutil::font(), {'Q', Case::Upper}), {}).image;
    auto probs = clf.probabilities(img);
    REQUIRE(probs.size() == 52);
    double sum = 0;
    for (double p : probs) {
        CHECK(p >= 0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("trained classifier recognizes every clean render") {
    const LetterClassifier& clf = testutil::classifier();
    int correct = 0;
    for (int i = 0; i < LetterClassifier::kClasses; ++i) {
        CasedLetter cl = LetterClassifier::class_letter(i);
        Raster img = rasterize(load_font_glyph(testutil::font(), cl), {}).image;
        if (clf.predict(img) == i) ++correct;
    }
    CHECK(correct == 52);
}

TEST_CASE("cross entropy gradient passes finite differences") {
    const LetterClassifier& clf = testutil::classifier();
    Raster img = rasterize(load_font_glyph(testutil::font(), {'E', Case::Upper}), {}).image;
    // blend toward gray so the softmax is not saturated
    for (double& v : img.ink) v = 0.5 * v + 0.25;
    int target = LetterClassifier::class_index({'F', Case::Upper});
    Raster grad;
    clf.cross_entropy(img, target, &grad);
    REQUIRE(grad.size() == img.size());

    Rng rng(3);
    double h = 1e-5;
    for (int probe = 0; probe < 40; ++probe) {
        size_t j = rng.next_u64() % img.size();
        Raster p = img, m = img;
        p.ink[j] += h;
        m.ink[j] -= h;
        double fd = (clf.cross_entropy(p, target) - clf.cross_entropy(m, target)) / (2 * h);
        CHECK(fd == doctest::Approx(grad.ink[j]).epsilon(1e-4));
    }
}

TEST_CASE("log prob gradient is minus the cross entropy gradient") {
    const LetterClassifier& clf = testutil::classifier();
    Raster img = rasterize(load_font_glyph(testutil::font(), {'K', Case::Lower}), {}).image;
    int target = LetterClassifier::class_index({'K', Case::Lower});
    Raster ce_grad;
    clf.cross_entropy(img, target, &ce_grad);
    Raster lp = clf.log_prob_gradient(img, target);
    for (size_t i = 0; i < lp.size(); ++i)
        CHECK(lp.ink[i] == doctest::Approx(-ce_grad.ink[i]).epsilon(1e-12));
}

TEST_CASE("save and load preserve behavior") {
    const LetterClassifier& clf = testutil::classifier();
    const char* path = "classifier-roundtrip.bin";
    clf.save(path);
    LetterClassifier loaded = LetterClassifier::load(path);
    CHECK(loaded.trained());
    Raster img = rasterize(load_font_glyph(testutil::font(), {'R', Case::Upper}), {}).image;
    auto a = clf.logits(img);
    auto b = loaded.logits(img);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    std::remove(path);
}

TEST_CASE("shape and class range are validated") {
    const LetterClassifier& clf = testutil::classifier();
    Raster wrong(32, 32);
    CHECK_THROWS_AS(clf.logits(wrong), DimensionMismatch);
    Raster ok(64, 64);
    CHECK_THROWS_AS(clf.cross_entropy(ok, 99), ConfigError);
}

TEST_CASE("load_or_train reuses the cache deterministically") {
    // the fixture already trained or loaded it once; a second load must agree
    const LetterClassifier& first = testutil::classifier();
    LetterClassifier second =
        load_or_train_classifier(testutil::font(), "ambigen-test-classifier.bin", 11);
    Raster img = rasterize(load_font_glyph(testutil::font(), {'W', Case::Lower}), {}).image;
    auto a = first.logits(img);
    auto b = second.logits(img);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
