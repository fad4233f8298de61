#include "ambigen/svg.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

namespace ambigen {

namespace {

void append_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out += buf;
}

struct Cursor {
    const std::string& text;
    size_t pos = 0;
    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void skip_ws() {
        while (!eof() && (std::isspace((unsigned char)text[pos]) || text[pos] == ','))
            ++pos;
    }
};

std::optional<double> parse_number(Cursor& c) {
    c.skip_ws();
    size_t start = c.pos;
    if (!c.eof() && (c.peek() == '+' || c.peek() == '-')) ++c.pos;
    bool digits = false;
    while (!c.eof() && std::isdigit((unsigned char)c.peek())) { ++c.pos; digits = true; }
    if (!c.eof() && c.peek() == '.') {
        ++c.pos;
        while (!c.eof() && std::isdigit((unsigned char)c.peek())) { ++c.pos; digits = true; }
    }
    if (!digits) { c.pos = start; return std::nullopt; }
    if (!c.eof() && (c.peek() == 'e' || c.peek() == 'E')) {
        size_t mark = c.pos;
        ++c.pos;
        if (!c.eof() && (c.peek() == '+' || c.peek() == '-')) ++c.pos;
        bool exp_digits = false;
        while (!c.eof() && std::isdigit((unsigned char)c.peek())) { ++c.pos; exp_digits = true; }
        if (!exp_digits) c.pos = mark;
    }
    double v = 0;
    auto res = std::from_chars(c.text.data() + start, c.text.data() + c.pos, v);
    if (res.ec != std::errc()) throw UnsupportedSvgFeature("malformed number in path data");
    return v;
}

double require_number(Cursor& c) {
    auto v = parse_number(c);
    if (!v) throw UnsupportedSvgFeature("expected number in path data");
    return *v;
}

constexpr double kWeldTolerance = 1e-6;

// One subpath under construction: raw cubic segments, welded into a closed
// BezierPath on Z.
struct SubpathBuilder {
    std::vector<Vec2> pts; // 3 per segment so far
    Vec2 start{};
    Vec2 cur{};
    bool open = false;

    void moveto(Vec2 p) {
        start = cur = p;
        pts.clear();
        open = true;
    }
    void cubic(Vec2 c1, Vec2 c2, Vec2 end) {
        pts.push_back(cur);
        pts.push_back(c1);
        pts.push_back(c2);
        cur = end;
    }
    void line(Vec2 end) {
        auto seg = line_to_cubic(cur, end);
        pts.push_back(seg[0]);
        pts.push_back(seg[1]);
        pts.push_back(seg[2]);
        cur = end;
    }
    std::optional<BezierPath> close() {
        if (!open) return std::nullopt;
        open = false;
        if ((cur - start).norm() > kWeldTolerance) line(start);
        if (pts.empty()) return std::nullopt; // degenerate: M immediately followed by Z
        return BezierPath(pts);
    }
};

void parse_path_data(const std::string& d, const Affine& xf, std::vector<BezierPath>& out) {
    Cursor c{d};
    SubpathBuilder sp;
    char cmd = 0;
    auto emit = [&] {
        if (auto p = sp.close()) {
            p->transform(xf);
            out.push_back(std::move(*p));
        }
    };
    while (true) {
        c.skip_ws();
        if (c.eof()) break;
        char ch = c.peek();
        if (std::isalpha((unsigned char)ch)) {
            cmd = ch;
            ++c.pos;
        } else if (cmd == 0) {
            throw UnsupportedSvgFeature("path data must start with a command");
        }
        // implicit command repetition: after M, bare coordinates act as L
        bool rel = std::islower((unsigned char)cmd);
        Vec2 base = rel ? sp.cur : Vec2{0, 0};
        switch (std::toupper((unsigned char)cmd)) {
        case 'M': {
            double x = require_number(c), y = require_number(c);
            emit();
            sp.moveto({base.x + x, base.y + y});
            cmd = rel ? 'l' : 'L';
            break;
        }
        case 'L': {
            double x = require_number(c), y = require_number(c);
            sp.line({base.x + x, base.y + y});
            break;
        }
        case 'H': {
            double x = require_number(c);
            sp.line({base.x + x, sp.cur.y});
            break;
        }
        case 'V': {
            double y = require_number(c);
            sp.line({sp.cur.x, base.y + y});
            break;
        }
        case 'C': {
            double x1 = require_number(c), y1 = require_number(c);
            double x2 = require_number(c), y2 = require_number(c);
            double x = require_number(c), y = require_number(c);
            sp.cubic({base.x + x1, base.y + y1}, {base.x + x2, base.y + y2},
                     {base.x + x, base.y + y});
            break;
        }
        case 'Z': {
            emit();
            sp.cur = sp.start;
            break;
        }
        default:
            throw UnsupportedSvgFeature(std::string("unsupported path command '") + cmd + "'");
        }
    }
    if (sp.open) emit(); // tolerate a missing trailing Z
}

struct Tag {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    bool closing = false;
    bool self_closing = false;
    size_t end_pos = 0;
};

std::optional<Tag> next_tag(const std::string& text, size_t from) {
    size_t lt = text.find('<', from);
    while (lt != std::string::npos) {
        if (text.compare(lt, 4, "<!--") == 0) {
            size_t end = text.find("-->", lt);
            if (end == std::string::npos) return std::nullopt;
            lt = text.find('<', end + 3);
            continue;
        }
        if (lt + 1 < text.size() && (text[lt + 1] == '?' || text[lt + 1] == '!')) {
            size_t end = text.find('>', lt);
            if (end == std::string::npos) return std::nullopt;
            lt = text.find('<', end + 1);
            continue;
        }
        break;
    }
    if (lt == std::string::npos) return std::nullopt;
    size_t gt = text.find('>', lt);
    if (gt == std::string::npos) throw UnsupportedSvgFeature("unterminated tag");
    Tag tag;
    tag.end_pos = gt + 1;
    size_t p = lt + 1;
    if (text[p] == '/') {
        tag.closing = true;
        ++p;
    }
    while (p < gt && !std::isspace((unsigned char)text[p]) && text[p] != '/')
        tag.name += text[p++];
    while (p < gt) {
        while (p < gt && std::isspace((unsigned char)text[p])) ++p;
        if (p >= gt || text[p] == '/') break;
        std::string key;
        while (p < gt && text[p] != '=' && !std::isspace((unsigned char)text[p]))
            key += text[p++];
        while (p < gt && std::isspace((unsigned char)text[p])) ++p;
        if (p < gt && text[p] == '=') {
            ++p;
            while (p < gt && std::isspace((unsigned char)text[p])) ++p;
            if (p < gt && (text[p] == '"' || text[p] == '\'')) {
                char quote = text[p++];
                std::string val;
                while (p < gt && text[p] != quote) val += text[p++];
                ++p;
                tag.attrs.emplace_back(key, val);
            }
        } else if (!key.empty()) {
            tag.attrs.emplace_back(key, "");
        }
    }
    if (gt > lt && text[gt - 1] == '/') tag.self_closing = true;
    return tag;
}

const std::string* find_attr(const Tag& t, const std::string& name) {
    for (const auto& [k, v] : t.attrs)
        if (k == name) return &v;
    return nullptr;
}

Affine parse_transform(const std::string& s) {
    Affine xf;
    Cursor c{s};
    while (true) {
        c.skip_ws();
        if (c.eof()) break;
        std::string fn;
        while (!c.eof() && (std::isalpha((unsigned char)c.peek())))
            fn += c.text[c.pos++];
        c.skip_ws();
        if (c.eof() || c.peek() != '(')
            throw UnsupportedSvgFeature("malformed transform attribute");
        ++c.pos;
        std::vector<double> args;
        while (true) {
            auto v = parse_number(c);
            if (!v) break;
            args.push_back(*v);
        }
        c.skip_ws();
        if (c.eof() || c.peek() != ')')
            throw UnsupportedSvgFeature("malformed transform attribute");
        ++c.pos;
        if (fn == "translate") {
            double dx = args.size() > 0 ? args[0] : 0;
            double dy = args.size() > 1 ? args[1] : 0;
            xf = Affine::translate(dx, dy).then(xf);
        } else if (fn == "scale") {
            double sx = args.size() > 0 ? args[0] : 1;
            double sy = args.size() > 1 ? args[1] : sx;
            if (sx != sy)
                throw UnsupportedSvgFeature("non-uniform scale transform is unsupported");
            xf = Affine{sx, 0, 0, sy, 0, 0}.then(xf);
        } else {
            throw UnsupportedSvgFeature("unsupported transform '" + fn + "'");
        }
    }
    return xf;
}

} // namespace

namespace {

void append_path_data(std::string& out, const Glyph& g) {
    for (size_t pi = 0; pi < g.paths.size(); ++pi) {
        const BezierPath& path = g.paths[pi];
        if (pi) out += ' ';
        out += 'M';
        append_num(out, path.pts[0].x);
        out += ' ';
        append_num(out, path.pts[0].y);
        for (size_t i = 0; i < path.segment_count(); ++i) {
            CubicSegment s = path.segment(i);
            out += " C";
            for (int k = 1; k < 4; ++k) {
                if (k > 1) out += ' ';
                append_num(out, s.p[k].x);
                out += ' ';
                append_num(out, s.p[k].y);
            }
        }
        out += " Z";
    }
}

} // namespace

std::string to_svg(const Glyph& g) {
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" "
        "width=\"256\" height=\"256\">\n";
    out += "<path fill=\"black\" fill-rule=\"nonzero\" d=\"";
    append_path_data(out, g);
    out += "\"/>\n</svg>\n";
    return out;
}

std::string to_svg(const GlyphSequence& seq) {
    seq.validate();
    size_t n = seq.glyphs.size();
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
                      std::to_string(n) + " 1\" width=\"" + std::to_string(256 * n) +
                      "\" height=\"256\">\n";
    for (size_t i = 0; i < n; ++i) {
        Glyph placed = seq.glyphs[i];
        placed.transform(seq.placements[i].to_affine());
        out += "<path fill=\"black\" fill-rule=\"nonzero\" d=\"";
        append_path_data(out, placed);
        out += "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

Glyph from_svg(const std::string& text) {
    Glyph glyph;
    std::vector<Affine> stack{Affine{}};
    size_t pos = 0;
    while (auto tag = next_tag(text, pos)) {
        pos = tag->end_pos;
        if (tag->closing) {
            if (tag->name == "g" && stack.size() > 1) stack.pop_back();
            continue;
        }
        if (tag->name == "g") {
            Affine xf = stack.back();
            if (const auto* t = find_attr(*tag, "transform"))
                xf = parse_transform(*t).then(xf); // group transform applies before parent
            if (!tag->self_closing) stack.push_back(xf);
            continue;
        }
        if (tag->name == "path") {
            const auto* d = find_attr(*tag, "d");
            if (!d) continue;
            Affine xf = stack.back();
            if (const auto* t = find_attr(*tag, "transform"))
                xf = parse_transform(*t).then(xf);
            parse_path_data(*d, xf, glyph.paths);
            continue;
        }
        if (tag->name == "svg" || tag->name == "title" || tag->name == "desc")
            continue;
        throw UnsupportedSvgFeature("unsupported element <" + tag->name + ">");
    }
    if (glyph.paths.empty()) throw UnsupportedSvgFeature("no path elements found");
    glyph.validate();
    return glyph;
}

} // namespace ambigen
