#pragma once

// Vector glyph value types. A glyph is a set of closed cubic Bezier paths on
// a unit canvas (origin top-left, y down). Control points may spill up to
// half a canvas outside [0,1] so off-canvas handles survive rotation and
// perspective augmentation.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ambigen/errors.hpp"

namespace ambigen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm2() const { return x * x + y * y; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

// Affine map p -> {a*x + b*y + tx, c*x + d*y + ty}
struct Affine {
    double a = 1, b = 0, c = 0, d = 1, tx = 0, ty = 0;

    Vec2 apply(const Vec2& p) const {
        return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
    }
    static Affine translate(double dx, double dy) { return {1, 0, 0, 1, dx, dy}; }
    static Affine scale_about(double s, Vec2 center) {
        return {s, 0, 0, s, center.x * (1 - s), center.y * (1 - s)};
    }
    // 180-degree rotation about the canvas center (0.5, 0.5)
    static Affine rotate180() { return {-1, 0, 0, -1, 1, 1}; }
    Affine then(const Affine& o) const {
        return {o.a * a + o.b * c, o.a * b + o.b * d,
                o.c * a + o.d * c, o.c * b + o.d * d,
                o.a * tx + o.b * ty + o.tx, o.c * tx + o.d * ty + o.ty};
    }
};

struct CubicSegment {
    std::array<Vec2, 4> p;
    Vec2 eval(double t) const {
        double u = 1 - t;
        double w0 = u * u * u, w1 = 3 * u * u * t, w2 = 3 * u * t * t, w3 = t * t * t;
        return {w0 * p[0].x + w1 * p[1].x + w2 * p[2].x + w3 * p[3].x,
                w0 * p[0].y + w1 * p[1].y + w2 * p[2].y + w3 * p[3].y};
    }
};

// Closed cubic path with shared segment endpoints stored once: 3k points for
// k segments, segment i = (pts[3i], pts[3i+1], pts[3i+2], pts[3(i+1) mod 3k]).
// Closure is therefore exact by construction.
struct BezierPath {
    std::vector<Vec2> pts;

    BezierPath() = default;
    explicit BezierPath(std::vector<Vec2> points);

    size_t segment_count() const { return pts.size() / 3; }
    CubicSegment segment(size_t i) const {
        size_t n = pts.size();
        return {{pts[3 * i], pts[3 * i + 1], pts[3 * i + 2], pts[(3 * i + 3) % n]}};
    }
    void transform(const Affine& t) {
        for (auto& p : pts) p = t.apply(p);
    }
    // Signed area of the flattened outline (positive = counter-clockwise in
    // canvas coordinates, i.e. y down)
    double signed_area(int subdivisions = 16) const;
};

struct BBox {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

struct Glyph {
    std::vector<BezierPath> paths; // fill rule: nonzero

    bool empty() const { return paths.empty(); }
    size_t control_point_count() const {
        size_t n = 0;
        for (const auto& p : paths) n += p.pts.size();
        return n;
    }
    void transform(const Affine& t) {
        for (auto& p : paths) p.transform(t);
    }
    BBox control_bbox() const;
    void validate() const; // throws Error on structural violations
};

// Per-glyph placement into a word canvas: uniform scale then translate.
struct Placement {
    double scale = 1.0;
    Vec2 offset{0, 0};
    Affine to_affine() const { return {scale, 0, 0, scale, offset.x, offset.y}; }
};

struct GlyphSequence {
    std::vector<Glyph> glyphs;
    std::vector<Placement> placements;

    size_t size() const { return glyphs.size(); }
    void validate() const;
};

Glyph rotate180(const Glyph& g);

// Degree elevation: line chord -> cubic with handles at 1/3 and 2/3, and
// quadratic -> cubic with the standard 2/3 rule.
std::array<Vec2, 4> line_to_cubic(Vec2 a, Vec2 b);
std::array<Vec2, 4> quadratic_to_cubic(Vec2 a, Vec2 q, Vec2 b);

// Flat parameter vector <-> glyph control points (x,y interleaved, paths in
// order). The optimizer works on this view.
std::vector<double> flatten_points(const Glyph& g);
void apply_points(Glyph& g, std::span<const double> flat);

std::vector<double> flatten_points(const GlyphSequence& s);
void apply_points(GlyphSequence& s, std::span<const double> flat);

} // namespace ambigen
