#pragma once

#include <string>
#include <vector>

#include "ambigen/font.hpp"
#include "ambigen/geometry.hpp"
#include "ambigen/letters.hpp"
#include "ambigen/raster.hpp"

namespace ambigen {

enum class AlignmentScheme { Naive, MaxOverlap, ContactLeft, ContactRight };

const char* scheme_name(AlignmentScheme s);
AlignmentScheme scheme_from_name(const std::string& name);  // throws ConfigError

inline constexpr AlignmentScheme kAllSchemes[] = {
    AlignmentScheme::Naive, AlignmentScheme::MaxOverlap, AlignmentScheme::ContactLeft,
    AlignmentScheme::ContactRight};

enum class CasePolicy { Upper, Lower, TryBoth };

// A word read upright and the word read after rotating the page. Letters are
// stored uppercase; the per-position policy says which case variants the
// designer may try.
struct AmbigramTask {
    std::string word_a;
    std::string word_b;
    std::vector<CasePolicy> policy;  // sized N

    size_t length() const { return word_a.size(); }
    void validate() const;
};

AmbigramTask make_task(const std::string& word_a, const std::string& word_b,
                       CasePolicy policy = CasePolicy::TryBoth);

struct PixelShift {
    int dx = 0;
    int dy = 0;
};

// Shift of img_b_rot, in pixels, that overlays it onto img_a under the given
// scheme. Inputs are foreground masks (ink > 0.5). MaxOverlap maximizes the
// overlapping foreground count with ties broken by smallest L2 norm, then
// smallest dx, then smallest dy. Contact schemes scan horizontal shifts only
// and return 0.7 of the extreme shift that still overlaps.
PixelShift alignment_shift(const Raster& img_a, const Raster& img_b_rot, AlignmentScheme scheme);

// Rasters letter pairs for alignment at this size.
inline constexpr int kAlignResolution = 64;

// Union of the glyph of a and the rotated glyph of b, the latter translated
// by the alignment shift in canvas fractions.
Glyph init_letter_pair(const CasedLetter& a, const CasedLetter& b, const FontFile& font,
                       AlignmentScheme scheme);

// Places N glyphs into N unit cells of the [0,N]x[0,1] word canvas. Each
// glyph is rewritten into cell-local coordinates, scaled to fit its cell
// preserving aspect (control bbox touches the cell on the tight axis) and
// centered; placements then translate cell n to x = n.
GlyphSequence layout_word(const std::vector<Glyph>& glyphs);

} // namespace ambigen
