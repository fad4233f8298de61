#pragma once

#include <memory>
#include <vector>

#include "ambigen/geometry.hpp"

namespace ambigen {

// Grayscale ink image over the unit canvas, row-major, values in [0,1]
// where 1 is full ink (black) and 0 is blank paper.
struct Raster {
    int height = 0, width = 0;
    std::vector<double> ink;

    Raster() = default;
    Raster(int h, int w, double fill = 0)
        : height(h), width(w), ink(size_t(h) * size_t(w), fill) {}
    double& at(int y, int x) { return ink[size_t(y) * width + x]; }
    double at(int y, int x) const { return ink[size_t(y) * width + x]; }
    size_t size() const { return ink.size(); }
};

struct RasterizeOptions {
    int resolution = 64;
    // Each cubic is flattened at this many fixed parameter steps. The count
    // never depends on the geometry, which keeps the image a smooth function
    // of the control points.
    int flatten_steps = 16;
    // Canvas width in unit cells; the image is resolution*cells_wide pixels
    // wide. 0 means one cell for a glyph and one per glyph for a sequence.
    int cells_wide = 0;
};

// A path whose filled area is below one pixel; usually a collapsed contour.
// Reported alongside the image, never fatal.
struct DegeneratePath {
    size_t glyph = 0;
    size_t path = 0;
    double area = 0;
};

class RasterTape;

struct RasterResult {
    Raster image;
    std::shared_ptr<const RasterTape> tape;
    std::vector<DegeneratePath> degenerate;
};

// Anti-aliased coverage rendering under the nonzero fill rule: each pixel is
// the exact area fraction covered by the filled region, so fully interior
// pixels are 1, exterior pixels are 0, and only boundary pixels are partial.
RasterResult rasterize(const Glyph& glyph, const RasterizeOptions& opt = {});
RasterResult rasterize(const GlyphSequence& seq, const RasterizeOptions& opt = {});

// Pulls d(loss)/d(image) back to d(loss)/d(control points), laid out exactly
// like flatten_points of the rasterized glyph or sequence.
std::vector<double> rasterize_backward(const RasterTape& tape, const Raster& image_grad);

// Horizontal side-by-side concatenation and its adjoint.
Raster concat_pair(const Raster& left, const Raster& right);
void split_pair(const Raster& both_grad, Raster& left_grad, Raster& right_grad);

} // namespace ambigen
