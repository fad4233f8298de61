#include "ambigen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ambigen/errors.hpp"

namespace ambigen {

namespace {

// Subsegment pairs closer than this along either axis are treated as
// non-intersecting; guards the crossing solver against parallel noise.
constexpr double kCrossEps = 1e-12;
// Chunk or piece parameter spans below this are dropped.
constexpr double kSpanEps = 1e-12;
// Coverage this close to an exact 0 or 1 is floating point dust.
constexpr double kValueSnap = 1e-9;
constexpr double kTinyLen2 = 1e-24;

struct SubSeg {
    Vec2 a, b;
    int path;   // PathRec index
    int cubic;  // segment index within the path
    int step;   // a = eval(step / F), b = eval((step + 1) / F)
};

// One endpoint of a visible piece. other < 0 means the endpoint is the
// flattening vertex sub.a (vend 0) or sub.b (vend 1); otherwise it is the
// crossing of the owning subsegment with subsegment `other`.
struct PieceEnd {
    Vec2 q;
    int other = -1;
    int vend = 0;
};

// Maximal crossing-free run of a subsegment on the boundary of the filled
// region, oriented so ink lies on the side (d.y, -d.x) of d = e1.q - e0.q.
struct Piece {
    PieceEnd e0, e1;
    int sub = 0;
};

} // namespace

class RasterTape {
  public:
    struct PathRec {
        size_t flat_offset;  // into the flattened point vector, xy interleaved
        int point_count;     // control points in this path
        double scale;        // placement scale, 1 for a bare glyph
    };

    int resolution = 0;
    int flatten_steps = 0;
    int px_w = 0, px_h = 0;
    std::vector<SubSeg> subs;
    std::vector<Piece> pieces;
    std::vector<PathRec> paths;
    size_t flat_size = 0;
};

namespace {

// Signed crossing of segment ab with the +x ray from p; half-open in y so a
// shared vertex is counted once.
int ray_crossing(Vec2 p, Vec2 a, Vec2 b) {
    bool below_a = a.y <= p.y, below_b = b.y <= p.y;
    if (below_a == below_b) return 0;
    double t = (p.y - a.y) / (b.y - a.y);
    double x = a.x + t * (b.x - a.x);
    if (x <= p.x) return 0;
    return below_b ? 1 : -1;
}

// Per-band lists of subsegments, so winding probes touch only segments whose
// y-range overlaps the probe.
class BandIndex {
  public:
    void build(const std::vector<SubSeg>& subs, int bands) {
        bands_ = std::max(1, bands);
        lo_ = 1e300;
        hi_ = -1e300;
        for (const SubSeg& s : subs) {
            lo_ = std::min({lo_, s.a.y, s.b.y});
            hi_ = std::max({hi_, s.a.y, s.b.y});
        }
        if (hi_ <= lo_) {
            lo_ = 0;
            hi_ = 1;
        }
        lists_.assign(bands_, {});
        for (size_t i = 0; i < subs.size(); ++i) {
            int b0 = band_of(std::min(subs[i].a.y, subs[i].b.y));
            int b1 = band_of(std::max(subs[i].a.y, subs[i].b.y));
            for (int b = b0; b <= b1; ++b) lists_[b].push_back(int(i));
        }
    }

    int winding(const std::vector<SubSeg>& subs, Vec2 p) const {
        int w = 0;
        for (int i : lists_[band_of(p.y)]) w += ray_crossing(p, subs[i].a, subs[i].b);
        return w;
    }

  private:
    int band_of(double y) const {
        return std::clamp(int((y - lo_) / (hi_ - lo_) * bands_), 0, bands_ - 1);
    }

    int bands_ = 1;
    double lo_ = 0, hi_ = 1;
    std::vector<std::vector<int>> lists_;
};

void bernstein(double t, double w[4]) {
    double u = 1 - t;
    w[0] = u * u * u;
    w[1] = 3 * u * u * t;
    w[2] = 3 * u * t * t;
    w[3] = t * t * t;
}

// Crossing parameter along e of the proper intersection of subsegments e and
// o, or -1 when there is none.
double crossing_param(const SubSeg& e, const SubSeg& o) {
    Vec2 w1 = e.b - e.a, w2 = o.b - o.a;
    double den = w1.x * w2.y - w1.y * w2.x;
    if (std::abs(den) < kCrossEps) return -1;
    Vec2 r = o.a - e.a;
    double s = (r.x * w2.y - r.y * w2.x) / den;
    double u = (r.x * w1.y - r.y * w1.x) / den;
    if (s <= kCrossEps || s >= 1 - kCrossEps) return -1;
    if (u <= kCrossEps || u >= 1 - kCrossEps) return -1;
    return s;
}

// Splits segment q0..q1 (pixel coordinates) at integer x and y lines and
// hands each chunk to fn as (s0, s1, x0, y0, x1, y1, cx, cy). Chunk interiors
// stay within one cell; cell indices may fall outside the canvas.
template <typename Fn>
void walk_cells(Vec2 q0, Vec2 q1, Fn&& fn) {
    std::vector<double> splits;
    splits.reserve(8);
    splits.push_back(0);
    Vec2 d = q1 - q0;
    auto cut_axis = [&](double c0, double dc) {
        if (std::abs(dc) < kCrossEps) return;
        double lo = std::min(c0, c0 + dc), hi = std::max(c0, c0 + dc);
        for (double k = std::ceil(lo); k < hi; ++k) {
            double s = (k - c0) / dc;
            if (s > 0 && s < 1) splits.push_back(s);
        }
    };
    cut_axis(q0.x, d.x);
    cut_axis(q0.y, d.y);
    splits.push_back(1);
    std::sort(splits.begin(), splits.end());
    for (size_t i = 0; i + 1 < splits.size(); ++i) {
        double s0 = splits[i], s1 = splits[i + 1];
        if (s1 - s0 < kSpanEps) continue;
        double sm = 0.5 * (s0 + s1);
        int cx = int(std::floor(q0.x + sm * d.x));
        int cy = int(std::floor(q0.y + sm * d.y));
        fn(s0, s1, q0.x + s0 * d.x, q0.y + s0 * d.y, q0.x + s1 * d.x, q0.y + s1 * d.y, cx, cy);
    }
}

struct PathInput {
    const BezierPath* path;
    double scale;   // placement scale for the backward chain
    size_t glyph;   // diagnostics only
    size_t index;   // diagnostics only
};

RasterResult rasterize_paths(const std::vector<PathInput>& inputs, const RasterizeOptions& opt,
                             int cells_wide) {
    if (opt.resolution < 8)
        throw ConfigError("raster resolution must be at least 8, got " +
                          std::to_string(opt.resolution));
    if (opt.flatten_steps < 2)
        throw ConfigError("flatten_steps must be at least 2, got " +
                          std::to_string(opt.flatten_steps));
    if (cells_wide < 1)
        throw ConfigError("cells_wide must be positive, got " + std::to_string(cells_wide));

    auto tape = std::make_shared<RasterTape>();
    tape->resolution = opt.resolution;
    tape->flatten_steps = opt.flatten_steps;
    tape->px_w = opt.resolution * cells_wide;
    tape->px_h = opt.resolution;

    const int F = opt.flatten_steps;
    const int res = opt.resolution;

    // Flatten every cubic at fixed parameter steps. Endpoints reuse the
    // control points bitwise so consecutive cubics share their vertex.
    size_t flat_offset = 0;
    for (const PathInput& in : inputs) {
        const BezierPath& bp = *in.path;
        int path_id = int(tape->paths.size());
        tape->paths.push_back({flat_offset, int(bp.pts.size()), in.scale});
        flat_offset += bp.pts.size() * 2;
        int segs = bp.segment_count();
        for (int c = 0; c < segs; ++c) {
            CubicSegment seg = bp.segment(c);
            Vec2 prev = seg.p[0];
            for (int k = 1; k <= F; ++k) {
                Vec2 cur = k == F ? seg.p[3] : seg.eval(double(k) / F);
                tape->subs.push_back({prev, cur, path_id, c, k - 1});
                prev = cur;
            }
        }
    }
    tape->flat_size = flat_offset;

    std::vector<SubSeg>& subs = tape->subs;

    // Proper pairwise crossings split subsegments into pieces so the filled
    // status is constant along each side of a piece.
    std::vector<std::vector<std::pair<double, int>>> cuts(subs.size());
    for (size_t i = 0; i < subs.size(); ++i) {
        const SubSeg& e = subs[i];
        double elx = std::min(e.a.x, e.b.x), ehx = std::max(e.a.x, e.b.x);
        double ely = std::min(e.a.y, e.b.y), ehy = std::max(e.a.y, e.b.y);
        for (size_t j = i + 1; j < subs.size(); ++j) {
            const SubSeg& o = subs[j];
            if (std::min(o.a.x, o.b.x) > ehx || std::max(o.a.x, o.b.x) < elx) continue;
            if (std::min(o.a.y, o.b.y) > ehy || std::max(o.a.y, o.b.y) < ely) continue;
            double s = crossing_param(e, o);
            if (s < 0) continue;
            double u = crossing_param(o, e);
            if (u < 0) continue;
            cuts[i].push_back({s, int(j)});
            cuts[j].push_back({u, int(i)});
        }
    }

    BandIndex bands;
    bands.build(subs, res);

    // A piece lies on the region boundary iff exactly one of its sides is
    // filled under the nonzero rule. Orient each so ink falls on the side
    // (d.y, -d.x); the coverage sweep below assumes that convention.
    const double probe = 1e-7;
    for (size_t i = 0; i < subs.size(); ++i) {
        const SubSeg& s = subs[i];
        Vec2 d = s.b - s.a;
        double len2 = d.x * d.x + d.y * d.y;
        if (len2 < kTinyLen2) continue;
        double len = std::sqrt(len2);
        Vec2 n{-d.y / len, d.x / len};
        std::sort(cuts[i].begin(), cuts[i].end());
        double t0 = 0;
        int from_other = -1;
        int from_vend = 0;
        auto flush = [&](double t1, int to_other, int to_vend) {
            if (t1 - t0 >= kSpanEps) {
                Vec2 q0 = s.a + d * t0, q1 = s.a + d * t1;
                Vec2 m = (q0 + q1) * 0.5;
                bool ink_left = bands.winding(subs, m + n * probe) != 0;
                bool ink_right = bands.winding(subs, m - n * probe) != 0;
                if (ink_left != ink_right) {
                    PieceEnd ea{q0, from_other, from_vend};
                    PieceEnd eb{q1, to_other, to_vend};
                    if (ink_left) std::swap(ea, eb);
                    tape->pieces.push_back({ea, eb, int(i)});
                }
            }
            t0 = t1;
            from_other = to_other;
            from_vend = to_vend;
        };
        for (auto [t, other] : cuts[i]) flush(t, other, 0);
        flush(1, -1, 1);
    }

    // Exact coverage sweep. Every chunk adds its signed y-extent to the
    // winding of cells to its right via the row prefix, plus a partial term
    // for its own cell; the prefix then equals the covered area fraction.
    // Chunks left of the canvas fold into the row base and rows outside it
    // never influence canvas pixels.
    const int W = tape->px_w, H = tape->px_h;
    std::vector<double> area(size_t(W) * H, 0), cover(size_t(W) * H, 0), row_base(H, 0);
    for (const Piece& pc : tape->pieces) {
        Vec2 p0 = pc.e0.q * double(res), p1 = pc.e1.q * double(res);
        walk_cells(p0, p1, [&](double, double, double x0, double y0, double x1, double y1,
                               int cx, int cy) {
            if (cy < 0 || cy >= H || cx >= W) return;
            double dy = y1 - y0;
            if (cx < 0) {
                row_base[cy] += dy;
                return;
            }
            size_t cell = size_t(cy) * W + cx;
            area[cell] += dy * (cx + 1 - 0.5 * (x0 + x1));
            cover[cell] += dy;
        });
    }

    RasterResult out;
    out.image = Raster(H, W);
    for (int y = 0; y < H; ++y) {
        double running = row_base[y];
        for (int x = 0; x < W; ++x) {
            size_t cell = size_t(y) * W + x;
            double v = running + area[cell];
            running += cover[cell];
            if (v < kValueSnap) v = 0;
            else if (v > 1 - kValueSnap) v = 1;
            out.image.at(y, x) = v;
        }
    }

    // Collapsed contours render as (near) nothing; report them so callers can
    // drop or reinitialize, but keep going.
    size_t sub_at = 0;
    for (const PathInput& in : inputs) {
        int segs = in.path->segment_count();
        double a2 = 0;  // twice the signed shoelace area of the flattening
        for (int k = 0; k < segs * F; ++k) {
            const SubSeg& s = subs[sub_at++];
            a2 += s.a.x * s.b.y - s.b.x * s.a.y;
        }
        double frac = std::abs(a2) * 0.5;
        if (frac * res * res < 1.0) out.degenerate.push_back({in.glyph, in.index, frac});
    }

    out.tape = std::move(tape);
    return out;
}

std::vector<PathInput> glyph_inputs(const Glyph& g, size_t glyph_id, double scale) {
    std::vector<PathInput> v;
    v.reserve(g.paths.size());
    for (size_t i = 0; i < g.paths.size(); ++i) v.push_back({&g.paths[i], scale, glyph_id, i});
    return v;
}

} // namespace

RasterResult rasterize(const Glyph& glyph, const RasterizeOptions& opt) {
    glyph.validate();
    return rasterize_paths(glyph_inputs(glyph, 0, 1.0), opt,
                           opt.cells_wide > 0 ? opt.cells_wide : 1);
}

RasterResult rasterize(const GlyphSequence& seq, const RasterizeOptions& opt) {
    if (seq.glyphs.size() != seq.placements.size())
        throw DimensionMismatch("glyph sequence has " + std::to_string(seq.glyphs.size()) +
                                " glyphs but " + std::to_string(seq.placements.size()) +
                                " placements");
    std::vector<Glyph> placed(seq.glyphs.size());
    std::vector<PathInput> inputs;
    for (size_t gi = 0; gi < seq.glyphs.size(); ++gi) {
        seq.glyphs[gi].validate();
        const Placement& pl = seq.placements[gi];
        placed[gi] = seq.glyphs[gi];
        placed[gi].transform({pl.scale, 0, 0, pl.scale, pl.offset.x, pl.offset.y});
        for (size_t i = 0; i < placed[gi].paths.size(); ++i)
            inputs.push_back({&placed[gi].paths[i], pl.scale, gi, i});
    }
    int cells = opt.cells_wide > 0 ? opt.cells_wide : int(std::max<size_t>(seq.glyphs.size(), 1));
    return rasterize_paths(inputs, opt, cells);
}

std::vector<double> rasterize_backward(const RasterTape& tape, const Raster& image_grad) {
    const int res = tape.resolution;
    if (image_grad.height != tape.px_h || image_grad.width != tape.px_w)
        throw DimensionMismatch("image gradient is " + std::to_string(image_grad.height) + "x" +
                                std::to_string(image_grad.width) + ", tape expects " +
                                std::to_string(tape.px_h) + "x" + std::to_string(tape.px_w));

    std::vector<double> out(tape.flat_size, 0);
    const int F = tape.flatten_steps;

    // Gradient of one flattening vertex, pushed to the control points of its
    // cubic through the Bernstein weights at t = k / F.
    auto add_vertex = [&](int path, int cubic, int k, Vec2 g) {
        const RasterTape::PathRec& pr = tape.paths[path];
        g = g * pr.scale;
        int n = pr.point_count;
        if (k == 0) {
            size_t at = pr.flat_offset + size_t(3 * cubic) * 2;
            out[at] += g.x;
            out[at + 1] += g.y;
            return;
        }
        if (k == F) {
            size_t at = pr.flat_offset + size_t((3 * cubic + 3) % n) * 2;
            out[at] += g.x;
            out[at + 1] += g.y;
            return;
        }
        double w[4];
        bernstein(double(k) / F, w);
        for (int j = 0; j < 4; ++j) {
            size_t at = pr.flat_offset + size_t((3 * cubic + j) % n) * 2;
            out[at] += g.x * w[j];
            out[at + 1] += g.y * w[j];
        }
    };

    auto add_sub_end = [&](const SubSeg& s, int vend, Vec2 g) {
        add_vertex(s.path, s.cubic, s.step + vend, g);
    };

    // x = a1 + s w1 with s = cross(r, w2) / cross(w1, w2) and r = a2 - a1;
    // pushes dL/dx to the four endpoints of the crossing subsegments.
    auto route_crossing = [&](int e_id, int o_id, Vec2 gx) {
        const SubSeg& e = tape.subs[e_id];
        const SubSeg& o = tape.subs[o_id];
        Vec2 w1 = e.b - e.a, w2 = o.b - o.a, r = o.a - e.a;
        double den = w1.x * w2.y - w1.y * w2.x;
        if (std::abs(den) < kCrossEps) return;
        double s = (r.x * w2.y - r.y * w2.x) / den;
        double gs = gx.x * w1.x + gx.y * w1.y;
        Vec2 g_r{w2.y * gs / den, -w2.x * gs / den};
        Vec2 g_w1{gx.x * s - w2.y * s * gs / den, gx.y * s + w2.x * s * gs / den};
        Vec2 g_w2{(-r.y + s * w1.y) * gs / den, (r.x - s * w1.x) * gs / den};
        add_sub_end(e, 0, gx - g_r - g_w1);
        add_sub_end(e, 1, g_w1);
        add_sub_end(o, 0, g_r - g_w2);
        add_sub_end(o, 1, g_w2);
    };

    auto route_end = [&](const Piece& pc, const PieceEnd& pe, Vec2 g) {
        if (pe.other < 0) add_sub_end(tape.subs[pc.sub], pe.vend, g);
        else route_crossing(pc.sub, pe.other, g);
    };

    // d(covered area in a cell) = integral of boundary velocity along the
    // outward normal. Velocity is linear along a straight piece, so each
    // chunk contributes exactly through its midpoint parameter.
    const int W = tape.px_w, H = tape.px_h;
    for (const Piece& pc : tape.pieces) {
        Vec2 p0 = pc.e0.q * double(res), p1 = pc.e1.q * double(res);
        Vec2 dp = p1 - p0;
        Vec2 g0{0, 0}, g1{0, 0};
        walk_cells(p0, p1, [&](double s0, double s1, double, double, double, double,
                               int cx, int cy) {
            if (cy < 0 || cy >= H || cx < 0 || cx >= W) return;
            double g = image_grad.at(cy, cx);
            if (g == 0) return;
            double span = (s1 - s0) * g, m = 0.5 * (s0 + s1);
            Vec2 w{-dp.y * span, dp.x * span};
            g0 += w * (1 - m);
            g1 += w * m;
        });
        // chunk math ran in pixel units; endpoints live in canvas units
        route_end(pc, pc.e0, g0 * double(res));
        route_end(pc, pc.e1, g1 * double(res));
    }
    return out;
}

Raster concat_pair(const Raster& left, const Raster& right) {
    if (left.height != right.height)
        throw DimensionMismatch("concat_pair heights differ: " + std::to_string(left.height) +
                                " vs " + std::to_string(right.height));
    Raster out(left.height, left.width + right.width);
    for (int y = 0; y < left.height; ++y) {
        for (int x = 0; x < left.width; ++x) out.at(y, x) = left.at(y, x);
        for (int x = 0; x < right.width; ++x) out.at(y, left.width + x) = right.at(y, x);
    }
    return out;
}

void split_pair(const Raster& both_grad, Raster& left_grad, Raster& right_grad) {
    if (left_grad.height != both_grad.height || right_grad.height != both_grad.height ||
        left_grad.width + right_grad.width != both_grad.width)
        throw DimensionMismatch("split_pair shapes do not add up");
    for (int y = 0; y < both_grad.height; ++y) {
        for (int x = 0; x < left_grad.width; ++x) left_grad.at(y, x) = both_grad.at(y, x);
        for (int x = 0; x < right_grad.width; ++x)
            right_grad.at(y, x) = both_grad.at(y, left_grad.width + x);
    }
}

} // namespace ambigen
