#include "ambigen/font.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ambigen/errors.hpp"

namespace ambigen {

namespace {

// Big-endian cursor over the font bytes. Every read is bounds checked so a
// truncated or hostile file fails with MalformedFont instead of UB.
struct Reader {
    const std::vector<uint8_t>& d;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > d.size()) throw MalformedFont("unexpected end of font data");
    }
    uint8_t u8() {
        need(1);
        return d[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(d[pos] << 8 | d[pos + 1]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = uint32_t(d[pos]) << 24 | uint32_t(d[pos + 1]) << 16 |
                     uint32_t(d[pos + 2]) << 8 | uint32_t(d[pos + 3]);
        pos += 4;
        return v;
    }
    int16_t i16() { return int16_t(u16()); }
    int8_t i8() { return int8_t(u8()); }
    double f2dot14() { return i16() / 16384.0; }
    void skip(size_t n) {
        need(n);
        pos += n;
    }
    void seek(size_t off) {
        if (off > d.size()) throw MalformedFont("seek past end of font data");
        pos = off;
    }
};

struct RawPoint {
    Vec2 p;
    bool on_curve;
};

// Simple-glyph point flags.
constexpr uint8_t kOnCurve = 0x01;
constexpr uint8_t kXShort = 0x02;
constexpr uint8_t kYShort = 0x04;
constexpr uint8_t kRepeat = 0x08;
constexpr uint8_t kXSame = 0x10;
constexpr uint8_t kYSame = 0x20;

// Composite-glyph component flags.
constexpr uint16_t kArgsAreWords = 0x0001;
constexpr uint16_t kArgsAreXY = 0x0002;
constexpr uint16_t kHaveScale = 0x0008;
constexpr uint16_t kMoreComponents = 0x0020;
constexpr uint16_t kHaveXYScale = 0x0040;
constexpr uint16_t kHave2x2 = 0x0080;

// Turns one decoded contour into cubic segments. Off-curve runs get the
// implied on-curve midpoints inserted first, so afterwards every off point
// sits between two on points and the walk is a plain line/quad alternation.
void contour_to_path(const std::vector<RawPoint>& contour, const Affine& xf, Glyph& out) {
    size_t n = contour.size();
    if (n < 2) return;

    std::vector<RawPoint> ring;
    ring.reserve(n * 2);
    for (size_t i = 0; i < n; i++) {
        ring.push_back(contour[i]);
        const RawPoint& next = contour[(i + 1) % n];
        if (!contour[i].on_curve && !next.on_curve)
            ring.push_back({(contour[i].p + next.p) * 0.5, true});
    }

    size_t m = ring.size();
    size_t r = 0;
    while (r < m && !ring[r].on_curve) r++;
    if (r == m) return;

    std::vector<Vec2> pts;
    Vec2 cur = ring[r].p;
    size_t i = 1;
    while (i <= m) {
        const RawPoint& a = ring[(r + i) % m];
        if (a.on_curve) {
            if ((a.p - cur).norm2() > 0) {
                auto seg = line_to_cubic(cur, a.p);
                pts.insert(pts.end(), {seg[0], seg[1], seg[2]});
            }
            cur = a.p;
            i += 1;
        } else {
            const RawPoint& b = ring[(r + i + 1) % m];
            auto seg = quadratic_to_cubic(cur, a.p, b.p);
            pts.insert(pts.end(), {seg[0], seg[1], seg[2]});
            cur = b.p;
            i += 2;
        }
    }
    if (pts.size() < 6) return; // a closed region needs at least two segments

    BezierPath path(std::move(pts));
    path.transform(xf);
    out.paths.push_back(std::move(path));
}

} // namespace

FontFile::FontFile(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedFont("cannot open font file: " + path);
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    Reader r{data_};
    uint32_t version = r.u32();
    if (version != 0x00010000 && version != 0x74727565) // 'true'
        throw MalformedFont("not a TrueType font (bad sfnt version)");
    uint16_t num_tables = r.u16();
    r.skip(6); // searchRange, entrySelector, rangeShift
    for (uint16_t i = 0; i < num_tables; i++) {
        r.need(16);
        std::string tag(reinterpret_cast<const char*>(&data_[r.pos]), 4);
        r.skip(4);
        r.u32(); // checksum
        uint32_t offset = r.u32();
        uint32_t length = r.u32();
        if (offset > data_.size() || length > data_.size() - offset)
            throw MalformedFont("table '" + tag + "' extends past end of file");
        tables_[tag] = {offset, length};
    }
    for (const char* required : {"head", "maxp", "cmap", "loca", "glyf"})
        if (!tables_.count(required))
            throw MalformedFont(std::string("missing required table '") + required + "'");

    Reader head{data_, tables_["head"].offset};
    head.skip(18);
    units_per_em_ = head.u16();
    if (units_per_em_ == 0) throw MalformedFont("unitsPerEm is zero");
    head.skip(30);
    long_loca_ = head.i16() == 1;

    Reader maxp{data_, tables_["maxp"].offset};
    maxp.skip(4);
    num_glyphs_ = maxp.u16();

    // Pick a Unicode cmap subtable, preferring full-repertoire format 12.
    Reader cm{data_, tables_["cmap"].offset};
    cm.skip(2);
    uint16_t sub_count = cm.u16();
    uint32_t best = 0;
    int best_rank = -1;
    for (uint16_t i = 0; i < sub_count; i++) {
        uint16_t platform = cm.u16();
        uint16_t encoding = cm.u16();
        uint32_t sub_off = tables_["cmap"].offset + cm.u32();
        Reader sub{data_, sub_off};
        uint16_t format = sub.u16();
        int rank = -1;
        bool unicode = platform == 0 || (platform == 3 && (encoding == 1 || encoding == 10));
        if (unicode && format == 12) rank = 2;
        if (unicode && format == 4) rank = 1;
        if (rank > best_rank) {
            best_rank = rank;
            best = sub_off;
        }
    }
    if (best_rank < 0) throw MalformedFont("no usable Unicode cmap subtable");
    cmap_subtable_ = best;
}

uint32_t FontFile::glyph_index(char32_t codepoint) const {
    Reader r{data_, cmap_subtable_};
    uint16_t format = r.u16();
    if (format == 4) {
        if (codepoint > 0xFFFF) return 0;
        r.skip(4); // length, language
        uint16_t seg_x2 = r.u16();
        uint16_t seg_count = seg_x2 / 2;
        r.skip(6); // searchRange, entrySelector, rangeShift
        size_t end_codes = r.pos;
        size_t start_codes = end_codes + seg_x2 + 2;
        size_t deltas = start_codes + seg_x2;
        size_t range_offsets = deltas + seg_x2;
        for (uint16_t s = 0; s < seg_count; s++) {
            Reader e{data_, end_codes + 2 * s};
            if (codepoint > e.u16()) continue;
            Reader st{data_, start_codes + 2 * s};
            uint16_t start = st.u16();
            if (codepoint < start) return 0;
            Reader dl{data_, deltas + 2 * s};
            int16_t delta = dl.i16();
            Reader ro{data_, range_offsets + 2 * s};
            uint16_t range_offset = ro.u16();
            if (range_offset == 0) return uint16_t(codepoint + delta);
            size_t addr = range_offsets + 2 * s + range_offset + 2 * (codepoint - start);
            Reader gi{data_, addr};
            uint16_t gid = gi.u16();
            return gid == 0 ? 0 : uint16_t(gid + delta);
        }
        return 0;
    }
    if (format == 12) {
        r.skip(10); // reserved, length, language
        uint32_t groups = r.u32();
        for (uint32_t g = 0; g < groups; g++) {
            uint32_t start = r.u32();
            uint32_t end = r.u32();
            uint32_t start_gid = r.u32();
            if (codepoint >= start && codepoint <= end)
                return start_gid + (uint32_t(codepoint) - start);
        }
        return 0;
    }
    throw MalformedFont("unsupported cmap subtable format " + std::to_string(format));
}

bool FontFile::has_glyph(char32_t codepoint) const { return glyph_index(codepoint) != 0; }

void FontFile::append_glyph_outline(uint32_t index, const Affine& xf, int depth,
                                    Glyph& out) const {
    if (depth > 5) throw MalformedFont("composite glyph nesting too deep");
    if (index >= num_glyphs_) throw MalformedFont("glyph index out of range");

    const Table& loca = tables_.at("loca");
    const Table& glyf = tables_.at("glyf");
    uint32_t start, end;
    if (long_loca_) {
        Reader r{data_, loca.offset + 4 * index};
        start = r.u32();
        end = r.u32();
    } else {
        Reader r{data_, loca.offset + 2 * index};
        start = uint32_t(r.u16()) * 2;
        end = uint32_t(r.u16()) * 2;
    }
    if (end < start || end > glyf.length) throw MalformedFont("bad loca entry");
    if (start == end) return; // empty outline, e.g. space

    Reader r{data_, glyf.offset + start};
    int16_t contour_count = r.i16();
    r.skip(8); // bbox

    if (contour_count >= 0) {
        std::vector<uint16_t> end_pts(contour_count);
        for (auto& e : end_pts) e = r.u16();
        size_t point_count = end_pts.empty() ? 0 : end_pts.back() + 1;
        r.skip(r.u16()); // instructions

        std::vector<uint8_t> flags;
        flags.reserve(point_count);
        while (flags.size() < point_count) {
            uint8_t f = r.u8();
            flags.push_back(f);
            if (f & kRepeat) {
                uint8_t reps = r.u8();
                for (uint8_t k = 0; k < reps && flags.size() < point_count; k++)
                    flags.push_back(f);
            }
        }

        std::vector<RawPoint> points(point_count);
        int x = 0;
        for (size_t i = 0; i < point_count; i++) {
            uint8_t f = flags[i];
            if (f & kXShort)
                x += (f & kXSame) ? r.u8() : -int(r.u8());
            else if (!(f & kXSame))
                x += r.i16();
            points[i].p.x = x;
            points[i].on_curve = f & kOnCurve;
        }
        int y = 0;
        for (size_t i = 0; i < point_count; i++) {
            uint8_t f = flags[i];
            if (f & kYShort)
                y += (f & kYSame) ? r.u8() : -int(r.u8());
            else if (!(f & kYSame))
                y += r.i16();
            points[i].p.y = y;
        }

        size_t first = 0;
        for (uint16_t e : end_pts) {
            if (e + 1u <= first) throw MalformedFont("contour end points not increasing");
            std::vector<RawPoint> contour(points.begin() + first, points.begin() + e + 1);
            contour_to_path(contour, xf, out);
            first = e + 1;
        }
    } else {
        uint16_t flags;
        do {
            flags = r.u16();
            uint16_t component = r.u16();
            double dx = 0, dy = 0;
            if (flags & kArgsAreWords) {
                int16_t a1 = r.i16(), a2 = r.i16();
                if (flags & kArgsAreXY) dx = a1, dy = a2;
            } else {
                int8_t a1 = r.i8(), a2 = r.i8();
                if (flags & kArgsAreXY) dx = a1, dy = a2;
            }
            // TrueType components transform as x' = ax + cy + e, y' = bx + dy + f;
            // our Affine rows are (a b tx / c d ty), hence the b/c swap below.
            double ma = 1, mb = 0, mc = 0, md = 1;
            if (flags & kHaveScale) {
                ma = md = r.f2dot14();
            } else if (flags & kHaveXYScale) {
                ma = r.f2dot14();
                md = r.f2dot14();
            } else if (flags & kHave2x2) {
                ma = r.f2dot14();
                mb = r.f2dot14();
                mc = r.f2dot14();
                md = r.f2dot14();
            }
            Affine comp{ma, mc, mb, md, dx, dy};
            size_t resume = r.pos;
            append_glyph_outline(component, comp.then(xf), depth + 1, out);
            r.seek(resume);
        } while (flags & kMoreComponents);
    }
}

Glyph FontFile::raw_outline(char32_t codepoint) const {
    uint32_t index = glyph_index(codepoint);
    if (index == 0)
        throw MissingGlyph("font has no glyph for codepoint " + std::to_string(uint32_t(codepoint)));
    Glyph g;
    append_glyph_outline(index, Affine{}, 0, g);
    if (g.empty())
        throw MissingGlyph("glyph for codepoint " + std::to_string(uint32_t(codepoint)) +
                           " has an empty outline");
    return g;
}

Glyph load_font_glyph(const FontFile& font, const CasedLetter& letter) {
    Glyph g = font.raw_outline(char32_t(letter.rendered()));
    g.transform({1, 0, 0, -1, 0, 0}); // font y-up to image y-down

    BBox box = g.control_bbox();
    double extent = std::max(box.width(), box.height());
    if (extent <= 0) throw MissingGlyph("degenerate outline bounding box");
    double s = 0.8 / extent;
    Vec2 c = box.center();
    g.transform({s, 0, 0, s, 0.5 - c.x * s, 0.5 - c.y * s});
    g.validate();
    return g;
}

std::string find_system_font() {
    if (const char* env = std::getenv("AMBIGEN_FONT")) {
        if (std::filesystem::exists(env)) return env;
        throw ConfigError(std::string("AMBIGEN_FONT points to a missing file: ") + env);
    }
    static const char* candidates[] = {
        "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
        "/usr/share/fonts/TTF/DejaVuSans.ttf",
        "/usr/share/fonts/dejavu/DejaVuSans.ttf",
        "/Library/Fonts/Arial Unicode.ttf",
        "/System/Library/Fonts/Supplemental/Arial.ttf",
    };
    for (const char* p : candidates)
        if (std::filesystem::exists(p)) return p;
    throw ConfigError("no usable font found; set AMBIGEN_FONT to a .ttf path");
}

} // namespace ambigen
