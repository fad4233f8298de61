#pragma once

#include <string>

#include "ambigen/raster.hpp"

namespace ambigen {

// 8-bit grayscale PNG. Ink 1 maps to black 0, blank paper to white 255.
void write_png_gray(const std::string& path, const Raster& img);

} // namespace ambigen
