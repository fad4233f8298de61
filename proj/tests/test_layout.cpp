#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "ambigen/errors.hpp"
#include "ambigen/image_ops.hpp"
#include "ambigen/layout.hpp"
#include "helpers.hpp"

using namespace ambigen;

namespace {

Raster random_binary(int h, int w, double density, Rng& rng) {
    Raster img(h, w);
    for (double& v : img.ink) v = rng.uniform() < density ? 1.0 : 0.0;
    return img;
}

int overlap_at(const Raster& a, const Raster& b, int dx, int dy) {
    int count = 0;
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            if (b.at(y, x) <= 0.5) continue;
            int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= a.height || xx < 0 || xx >= a.width) continue;
            if (a.at(yy, xx) > 0.5) ++count;
        }
    return count;
}

// independent exhaustive search with the documented tie-breaks
std::optional<PixelShift> brute_max_overlap(const Raster& a, const Raster& b) {
    int best = -1;
    PixelShift arg{0, 0};
    for (int dy = -(a.height - 1); dy <= a.height - 1; ++dy)
        for (int dx = -(a.width - 1); dx <= a.width - 1; ++dx) {
            int c = overlap_at(a, b, dx, dy);
            if (c > best) {
                best = c;
                arg = {dx, dy};
            } else if (c == best && c >= 0) {
                long cur = long(arg.dx) * arg.dx + long(arg.dy) * arg.dy;
                long cand = long(dx) * dx + long(dy) * dy;
                if (cand < cur || (cand == cur && (dx < arg.dx ||
                                                   (dx == arg.dx && dy < arg.dy))))
                    arg = {dx, dy};
            }
        }
    if (best < 0) return std::nullopt;
    return arg;
}

int brute_contact_extreme(const Raster& a, const Raster& b, bool left) {
    // most negative (left) or most positive (right) dx with any overlap at dy=0
    for (int step = 0; step <= a.width - 1; ++step) {
        int dx = left ? -(a.width - 1) + step : (a.width - 1) - step;
        if (overlap_at(a, b, dx, 0) > 0) return dx;
    }
    return 0;
}

} // namespace

TEST_CASE("max overlap equals brute force on 50 random pairs") {
    Rng rng(400);
    for (int trial = 0; trial < 50; ++trial) {
        Raster a = random_binary(16, 16, 0.25, rng);
        Raster b = random_binary(16, 16, 0.25, rng);
        auto expect = brute_max_overlap(a, b);
        REQUIRE(expect.has_value());
        PixelShift got = alignment_shift(a, b, AlignmentScheme::MaxOverlap);
        CHECK(got.dx == expect->dx);
        CHECK(got.dy == expect->dy);
        CHECK(overlap_at(a, b, got.dx, got.dy) == overlap_at(a, b, expect->dx, expect->dy));
    }
}

TEST_CASE("contact shifts sit at 0.7 of the brute force extreme") {
    Rng rng(500);
    for (int trial = 0; trial < 50; ++trial) {
        Raster a = random_binary(16, 16, 0.3, rng);
        Raster b = random_binary(16, 16, 0.3, rng);
        for (bool left : {true, false}) {
            int extreme = brute_contact_extreme(a, b, left);
            PixelShift got = alignment_shift(
                a, b, left ? AlignmentScheme::ContactLeft : AlignmentScheme::ContactRight);
            CHECK(got.dy == 0);
            CHECK(std::abs(got.dx - std::lround(0.7 * extreme)) <= 1);
        }
    }
}

TEST_CASE("naive scheme never shifts") {
    Rng rng(600);
    Raster a = random_binary(16, 16, 0.4, rng);
    Raster b = random_binary(16, 16, 0.4, rng);
    PixelShift got = alignment_shift(a, b, AlignmentScheme::Naive);
    CHECK(got.dx == 0);
    CHECK(got.dy == 0);
}

TEST_CASE("alignment on an empty image raises") {
    Rng rng(700);
    Raster a = random_binary(16, 16, 0.4, rng);
    Raster empty(16, 16, 0.0);
    CHECK_THROWS_AS(alignment_shift(a, empty, AlignmentScheme::MaxOverlap), EmptyImage);
    CHECK_THROWS_AS(alignment_shift(empty, a, AlignmentScheme::ContactLeft), EmptyImage);
}

TEST_CASE("scheme names round-trip") {
    for (AlignmentScheme s : kAllSchemes) CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK_THROWS_AS(scheme_from_name("diagonal"), ConfigError);
}

TEST_CASE("tasks validate words and policy coverage") {
    AmbigramTask t = make_task("swims", "swims");
    CHECK(t.length() == 5);
    CHECK(t.word_a == "SWIMS");
    t.validate();

    CHECK_THROWS_AS(make_task("ab", "abc").validate(), Error);
    CHECK_THROWS_AS(make_task("", "").validate(), Error);
    CHECK_THROWS_AS(make_task("a1", "bc").validate(), Error);

    AmbigramTask broken = make_task("ab", "cd");
    broken.policy.pop_back();
    CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("letter pair init unions the glyph with the aligned rotated partner") {
    const FontFile& font = testutil::font();
    Glyph a = load_font_glyph(font, {'O', Case::Upper});
    Glyph b = load_font_glyph(font, {'S', Case::Upper});
    Glyph pair = init_letter_pair({'O', Case::Upper}, {'S', Case::Upper}, font,
                                  AlignmentScheme::MaxOverlap);
    pair.validate();
    CHECK(pair.paths.size() == a.paths.size() + b.paths.size());

    // the naive union is the plain overlay: rotated S control points appear
    Glyph naive = init_letter_pair({'O', Case::Upper}, {'S', Case::Upper}, font,
                                   AlignmentScheme::Naive);
    Glyph rs = rotate180(b);
    auto pn = flatten_points(naive);
    auto pr = flatten_points(rs);
    auto pa = flatten_points(a);
    REQUIRE(pn.size() == pa.size() + pr.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pn[i] == doctest::Approx(pa[i]).epsilon(1e-12));
    for (size_t i = 0; i < pr.size(); ++i)
        CHECK(pn[pa.size() + i] == doctest::Approx(pr[i]).epsilon(1e-12));
}

TEST_CASE("word layout scales each glyph into its unit cell") {
    const FontFile& font = testutil::font();
    std::vector<Glyph> glyphs = {load_font_glyph(font, {'W', Case::Upper}),
                                 load_font_glyph(font, {'I', Case::Upper}),
                                 load_font_glyph(font, {'N', Case::Lower})};
    GlyphSequence seq = layout_word(glyphs);
    REQUIRE(seq.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(seq.placements[i].scale == 1.0);
        CHECK(seq.placements[i].offset.x == doctest::Approx(double(i)));
        CHECK(seq.placements[i].offset.y == 0.0);
        BBox box = seq.glyphs[i].control_bbox();
        CHECK(box.x0 >= -1e-9);
        CHECK(box.y0 >= -1e-9);
        CHECK(box.x1 <= 1 + 1e-9);
        CHECK(box.y1 <= 1 + 1e-9);
        // tight on the larger axis, centered on both
        CHECK(std::max(box.width(), box.height()) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(box.center().x == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(box.center().y == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("word layout rejects empty input") {
    CHECK_THROWS_AS(layout_word({}), Error);
}
