#include "ambigen/layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "ambigen/errors.hpp"

namespace ambigen {

const char* scheme_name(AlignmentScheme s) {
    switch (s) {
        case AlignmentScheme::Naive: return "naive";
        case AlignmentScheme::MaxOverlap: return "max-overlap";
        case AlignmentScheme::ContactLeft: return "contact-left";
        case AlignmentScheme::ContactRight: return "contact-right";
    }
    return "?";
}

AlignmentScheme scheme_from_name(const std::string& name) {
    for (AlignmentScheme s : kAllSchemes)
        if (name == scheme_name(s)) return s;
    throw ConfigError("unknown alignment scheme \"" + name +
                      "\"; expected naive, max-overlap, contact-left or contact-right");
}

void AmbigramTask::validate() const {
    if (word_a.empty()) throw ConfigError("task words must be nonempty");
    if (word_a.size() != word_b.size())
        throw ConfigError("task words must have equal length, got \"" + word_a + "\" and \"" +
                          word_b + "\"");
    if (policy.size() != word_a.size())
        throw ConfigError("case policy must cover every position");
    for (char c : word_a + word_b)
        if (c < 'A' || c > 'Z')
            throw ConfigError("task letters must be A-Z, got '" + std::string(1, c) + "'");
}

AmbigramTask make_task(const std::string& word_a, const std::string& word_b, CasePolicy policy) {
    AmbigramTask t;
    for (char c : word_a) t.word_a.push_back(char(std::toupper((unsigned char)c)));
    for (char c : word_b) t.word_b.push_back(char(std::toupper((unsigned char)c)));
    t.policy.assign(t.word_a.size(), policy);
    t.validate();
    return t;
}

namespace {

std::vector<std::pair<int, int>> foreground(const Raster& img) {
    std::vector<std::pair<int, int>> px;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(y, x) > 0.5) px.push_back({x, y});
    return px;
}

int overlap_count(const Raster& a, const std::vector<std::pair<int, int>>& b_px, int dx, int dy) {
    int count = 0;
    for (auto [x, y] : b_px) {
        int tx = x + dx, ty = y + dy;
        if (tx < 0 || ty < 0 || tx >= a.width || ty >= a.height) continue;
        if (a.at(ty, tx) > 0.5) ++count;
    }
    return count;
}

} // namespace

PixelShift alignment_shift(const Raster& img_a, const Raster& img_b_rot, AlignmentScheme scheme) {
    if (img_a.height != img_b_rot.height || img_a.width != img_b_rot.width)
        throw DimensionMismatch("alignment images must share a shape");
    auto a_px = foreground(img_a);
    auto b_px = foreground(img_b_rot);
    if (a_px.empty() || b_px.empty())
        throw EmptyImage("alignment needs foreground in both images");

    if (scheme == AlignmentScheme::Naive) return {0, 0};

    const int W = img_a.width, H = img_a.height;

    if (scheme == AlignmentScheme::MaxOverlap) {
        PixelShift best{0, 0};
        int best_count = -1;
        double best_norm = std::numeric_limits<double>::infinity();
        for (int dy = -(H - 1); dy <= H - 1; ++dy) {
            for (int dx = -(W - 1); dx <= W - 1; ++dx) {
                int c = overlap_count(img_a, b_px, dx, dy);
                if (c == 0) continue;
                double norm = double(dx) * dx + double(dy) * dy;
                bool take = c > best_count;
                if (c == best_count) {
                    if (norm != best_norm) take = norm < best_norm;
                    else if (dx != best.dx) take = dx < best.dx;
                    else take = dy < best.dy;
                }
                if (take) {
                    best = {dx, dy};
                    best_count = c;
                    best_norm = norm;
                }
            }
        }
        if (best_count < 0) return {0, 0};  // disjoint everywhere; keep centers
        return best;
    }

    // Contact: horizontal scan only, glyphs stay vertically centered. The
    // extreme shift is shrunk toward zero so the letters still overlap.
    bool left = scheme == AlignmentScheme::ContactLeft;
    int extreme = 0;
    bool found = false;
    for (int dx = -(W - 1); dx <= W - 1; ++dx) {
        if (overlap_count(img_a, b_px, dx, 0) == 0) continue;
        if (!found || (left ? dx < extreme : dx > extreme)) extreme = dx;
        found = true;
    }
    if (!found) return {0, 0};
    return {int(std::lround(0.7 * extreme)), 0};
}

Glyph init_letter_pair(const CasedLetter& a, const CasedLetter& b, const FontFile& font,
                       AlignmentScheme scheme) {
    Glyph ga = load_font_glyph(font, a);
    Glyph gb = rotate180(load_font_glyph(font, b));

    RasterizeOptions opt;
    opt.resolution = kAlignResolution;
    Raster ra = rasterize(ga, opt).image;
    Raster rb = rasterize(gb, opt).image;
    PixelShift shift = alignment_shift(ra, rb, scheme);

    gb.transform({1, 0, 0, 1, double(shift.dx) / kAlignResolution,
                  double(shift.dy) / kAlignResolution});
    Glyph out = ga;
    for (auto& p : gb.paths) out.paths.push_back(std::move(p));
    out.validate();
    return out;
}

GlyphSequence layout_word(const std::vector<Glyph>& glyphs) {
    GlyphSequence seq;
    for (size_t n = 0; n < glyphs.size(); ++n) {
        Glyph g = glyphs[n];
        BBox bb = g.control_bbox();
        double extent = std::max(bb.width(), bb.height());
        double s = extent > 0 ? 1.0 / extent : 1.0;
        Vec2 c = bb.center();
        g.transform({s, 0, 0, s, 0.5 - s * c.x, 0.5 - s * c.y});
        seq.glyphs.push_back(std::move(g));
        seq.placements.push_back({1.0, {double(n), 0.0}});
    }
    return seq;
}

} // namespace ambigen
