#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ambigen/geometry.hpp"
#include "ambigen/letters.hpp"

namespace ambigen {

// Minimal TrueType reader: enough of cmap/loca/glyf to pull letter outlines
// out of a .ttf file. Quadratic contours are degree-elevated to cubics so the
// rest of the system only ever sees cubic paths.
class FontFile {
  public:
    explicit FontFile(const std::string& path); // throws MalformedFont

    bool has_glyph(char32_t codepoint) const;

    // Outline in font units, y up, untranslated. Throws MissingGlyph.
    Glyph raw_outline(char32_t codepoint) const;

    const std::string& path() const { return path_; }
    int units_per_em() const { return units_per_em_; }

  private:
    struct Table {
        uint32_t offset = 0;
        uint32_t length = 0;
    };

    uint32_t glyph_index(char32_t codepoint) const;
    void append_glyph_outline(uint32_t index, const Affine& xf, int depth, Glyph& out) const;

    std::string path_;
    std::vector<uint8_t> data_;
    std::map<std::string, Table> tables_;
    int units_per_em_ = 1000;
    bool long_loca_ = false;
    uint32_t num_glyphs_ = 0;
    uint32_t cmap_subtable_ = 0; // absolute offset of the chosen cmap subtable
};

// Loads a letter outline and normalizes it to the unit canvas: uniform scale
// so the control-point bbox fits a centered square with a 10% margin on the
// larger axis, y flipped to image orientation (y grows downward).
Glyph load_font_glyph(const FontFile& font, const CasedLetter& letter);

// Resolves the font to use: $AMBIGEN_FONT if set, else the first existing
// path from a short list of common system font locations.
std::string find_system_font();

} // namespace ambigen
