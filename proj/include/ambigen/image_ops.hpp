#pragma once

#include "ambigen/raster.hpp"
#include "ambigen/rng.hpp"

namespace ambigen {

// out(y, x) = in(H-1-y, W-1-x). Self-adjoint, so it is its own gradient map.
Raster rotate180(const Raster& img);

// Bilinear resampling between resolutions; pixel centers at (i + 0.5) / n.
Raster resample(const Raster& img, int out_h, int out_w);
// Adjoint of resample for a given input shape.
Raster resample_backward(const Raster& out_grad, int in_h, int in_w);

// Homography taking output pixel coordinates to input pixel coordinates,
// row-major 3x3 with h[8] = 1.
struct PerspectiveWarp {
    double h[9];
};

// Random inward displacement of the four image corners, each by up to
// distortion_scale times the half extent. distortion_scale 0 is the identity.
PerspectiveWarp random_perspective(int height, int width, double distortion_scale, Rng& rng);

// Bilinear warp; samples outside the input count as blank paper.
Raster warp(const Raster& img, const PerspectiveWarp& w);
// Adjoint: scatters the output gradient through the same bilinear weights.
Raster warp_backward(const Raster& out_grad, const PerspectiveWarp& w, int in_h, int in_w);

// 3x3 binomial blur [1,2,1]x[1,2,1]/16 with zero padding. Self-adjoint.
Raster blur3(const Raster& img);

// 3x3 median with replicated borders.
Raster median3(const Raster& img);

// img + amount * (img - blur3(img)), clamped to [0,1].
Raster unsharp(const Raster& img, double amount);

} // namespace ambigen
