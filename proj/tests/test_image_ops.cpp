#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ambigen/image_ops.hpp"
#include "ambigen/rng.hpp"

using namespace ambigen;

namespace {

Raster random_image(int h, int w, uint64_t seed) {
    Raster img(h, w);
    Rng rng(seed);
    for (double& v : img.ink) v = rng.uniform();
    return img;
}

double dot(const Raster& a, const Raster& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a.ink[i] * b.ink[i];
    return s;
}

} // namespace

TEST_CASE("rotate180 involution and self-adjointness") {
    Raster img = random_image(13, 17, 1);
    Raster twice = rotate180(rotate180(img));
    for (size_t i = 0; i < img.size(); ++i) CHECK(twice.ink[i] == img.ink[i]);
    CHECK(rotate180(img).at(0, 0) == img.at(12, 16));

    Raster g = random_image(13, 17, 2);
    CHECK(dot(rotate180(img), g) == doctest::Approx(dot(img, rotate180(g))).epsilon(1e-12));
}

TEST_CASE("resample identity at matching size, adjoint otherwise") {
    Raster img = random_image(16, 16, 3);
    Raster same = resample(img, 16, 16);
    for (size_t i = 0; i < img.size(); ++i) CHECK(same.ink[i] == doctest::Approx(img.ink[i]));

    // <resample(x), g> == <x, resample_backward(g)>
    Raster g = random_image(24, 24, 4);
    Raster up = resample(img, 24, 24);
    Raster back = resample_backward(g, 16, 16);
    CHECK(dot(up, g) == doctest::Approx(dot(img, back)).epsilon(1e-10));
}

TEST_CASE("resample preserves a constant image") {
    Raster img(9, 9, 0.37);
    Raster up = resample(img, 21, 21);
    for (double v : up.ink) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("zero distortion perspective is the identity") {
    Rng rng(5);
    PerspectiveWarp w = random_perspective(20, 20, 0.0, rng);
    Raster img = random_image(20, 20, 6);
    Raster out = warp(img, w);
    for (size_t i = 0; i < img.size(); ++i)
        CHECK(out.ink[i] == doctest::Approx(img.ink[i]).epsilon(1e-9));
}

TEST_CASE("warp and warp_backward are adjoint") {
    Rng rng(7);
    PerspectiveWarp w = random_perspective(18, 18, 0.3, rng);
    Raster x = random_image(18, 18, 8);
    Raster g = random_image(18, 18, 9);
    Raster out = warp(x, w);
    Raster back = warp_backward(g, w, 18, 18);
    CHECK(dot(out, g) == doctest::Approx(dot(x, back)).epsilon(1e-10));
}

TEST_CASE("random_perspective is deterministic in the rng stream") {
    Rng a(11), b(11);
    PerspectiveWarp wa = random_perspective(32, 32, 0.4, a);
    PerspectiveWarp wb = random_perspective(32, 32, 0.4, b);
    for (int i = 0; i < 9; ++i) CHECK(wa.h[i] == wb.h[i]);
}

TEST_CASE("blur3 is self-adjoint and keeps values in range") {
    Raster x = random_image(15, 15, 12);
    Raster g = random_image(15, 15, 13);
    CHECK(dot(blur3(x), g) == doctest::Approx(dot(x, blur3(g))).epsilon(1e-10));
    Raster ones(15, 15, 1.0);
    Raster b = blur3(ones);
    // zero padding dims only the border
    CHECK(b.at(7, 7) == doctest::Approx(1.0));
    CHECK(b.at(0, 0) < 1.0);
}

TEST_CASE("median3 kills isolated pixels and keeps solid regions") {
    Raster img(11, 11, 0.0);
    img.at(5, 5) = 1.0;  // lone floater
    Raster m = median3(img);
    CHECK(m.at(5, 5) == 0.0);

    Raster solid(11, 11, 0.0);
    for (int y = 3; y < 8; ++y)
        for (int x = 3; x < 8; ++x) solid.at(y, x) = 1.0;
    Raster ms = median3(solid);
    CHECK(ms.at(5, 5) == 1.0);
    CHECK(ms.at(4, 4) == 1.0);
}

TEST_CASE("unsharp sharpens edges and clamps") {
    Raster img(9, 9, 0.0);
    for (int y = 0; y < 9; ++y)
        for (int x = 4; x < 9; ++x) img.at(y, x) = 1.0;
    Raster s = unsharp(img, 1.0);
    for (double v : s.ink) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // flat area far from the edge is untouched
    CHECK(s.at(4, 1) == doctest::Approx(0.0));
    CHECK(s.at(4, 7) == doctest::Approx(1.0));
}
