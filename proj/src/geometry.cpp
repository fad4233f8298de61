#include "ambigen/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ambigen {

BezierPath::BezierPath(std::vector<Vec2> points) : pts(std::move(points)) {
    if (pts.empty() || pts.size() % 3 != 0)
        throw Error("BezierPath requires 3k control points for k >= 1 segments");
    for (const auto& p : pts)
        if (!p.finite()) throw Error("BezierPath control point is not finite");
}

double BezierPath::signed_area(int subdivisions) const {
    // shoelace over the flattened outline
    double area = 0;
    Vec2 prev = segment(0).eval(0.0);
    Vec2 first = prev;
    for (size_t i = 0; i < segment_count(); ++i) {
        CubicSegment s = segment(i);
        for (int k = 1; k <= subdivisions; ++k) {
            Vec2 cur = s.eval(double(k) / subdivisions);
            area += prev.cross(cur);
            prev = cur;
        }
    }
    area += prev.cross(first);
    return area / 2;
}

BBox Glyph::control_bbox() const {
    BBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& path : paths)
        for (const auto& p : path.pts) {
            b.x0 = std::min(b.x0, p.x);
            b.y0 = std::min(b.y0, p.y);
            b.x1 = std::max(b.x1, p.x);
            b.y1 = std::max(b.y1, p.y);
        }
    return b;
}

void Glyph::validate() const {
    if (paths.empty()) throw Error("Glyph requires at least one path");
    for (const auto& path : paths) {
        if (path.pts.empty() || path.pts.size() % 3 != 0)
            throw Error("BezierPath requires 3k control points");
        for (const auto& p : path.pts)
            if (!p.finite()) throw Error("control point is not finite");
    }
}

void GlyphSequence::validate() const {
    if (glyphs.empty()) throw Error("GlyphSequence requires at least one glyph");
    if (placements.size() != glyphs.size())
        throw Error("GlyphSequence placement count must equal glyph count");
    for (const auto& g : glyphs) g.validate();
}

Glyph rotate180(const Glyph& g) {
    Glyph out = g;
    out.transform(Affine::rotate180());
    return out;
}

std::array<Vec2, 4> line_to_cubic(Vec2 a, Vec2 b) {
    return {a,
            {a.x + (b.x - a.x) / 3, a.y + (b.y - a.y) / 3},
            {a.x + 2 * (b.x - a.x) / 3, a.y + 2 * (b.y - a.y) / 3},
            b};
}

std::array<Vec2, 4> quadratic_to_cubic(Vec2 a, Vec2 q, Vec2 b) {
    return {a,
            {a.x + 2.0 / 3.0 * (q.x - a.x), a.y + 2.0 / 3.0 * (q.y - a.y)},
            {b.x + 2.0 / 3.0 * (q.x - b.x), b.y + 2.0 / 3.0 * (q.y - b.y)},
            b};
}

std::vector<double> flatten_points(const Glyph& g) {
    std::vector<double> out;
    out.reserve(2 * g.control_point_count());
    for (const auto& path : g.paths)
        for (const auto& p : path.pts) {
            out.push_back(p.x);
            out.push_back(p.y);
        }
    return out;
}

void apply_points(Glyph& g, std::span<const double> flat) {
    if (flat.size() != 2 * g.control_point_count())
        throw TopologyMismatch("flat parameter vector does not match glyph topology");
    size_t i = 0;
    for (auto& path : g.paths)
        for (auto& p : path.pts) {
            p.x = flat[i++];
            p.y = flat[i++];
        }
}

std::vector<double> flatten_points(const GlyphSequence& s) {
    std::vector<double> out;
    for (const auto& g : s.glyphs) {
        auto part = flatten_points(g);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

void apply_points(GlyphSequence& s, std::span<const double> flat) {
    size_t total = 0;
    for (const auto& g : s.glyphs) total += 2 * g.control_point_count();
    if (flat.size() != total)
        throw TopologyMismatch("flat parameter vector does not match sequence topology");
    size_t off = 0;
    for (auto& g : s.glyphs) {
        size_t n = 2 * g.control_point_count();
        apply_points(g, flat.subspan(off, n));
        off += n;
    }
}

} // namespace ambigen
