#pragma once

// SVG 1.1 path serialization for glyphs. Supported subset: <path> elements
// with M/L/H/V/C/Z commands (absolute or relative), nonzero fill, and group
// transforms limited to translate + scale. Anything else raises
// UnsupportedSvgFeature.

#include <string>

#include "ambigen/geometry.hpp"

namespace ambigen {

std::string to_svg(const Glyph& g);
// Word canvas export: viewBox spans one unit cell per glyph, placements baked
// into the path coordinates.
std::string to_svg(const GlyphSequence& seq);
Glyph from_svg(const std::string& text);

} // namespace ambigen
