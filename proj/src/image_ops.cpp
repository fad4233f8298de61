#include "ambigen/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "ambigen/errors.hpp"

namespace ambigen {

namespace {

// Solves the 8x8 linear system of the four-point homography by Gaussian
// elimination with partial pivoting.
void solve8(double a[8][9]) {
    for (int col = 0; col < 8; ++col) {
        int piv = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12) throw NumericalFailure("degenerate homography system");
        if (piv != col)
            for (int c = 0; c < 9; ++c) std::swap(a[piv][c], a[col][c]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int r = 0; r < 8; ++r) a[r][8] /= a[r][r];
}

// Homography h with h(src_i) = dst_i for four point pairs.
void four_point_homography(const double src[4][2], const double dst[4][2], double h[9]) {
    double a[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        double x = src[i][0], y = src[i][1];
        double u = dst[i][0], v = dst[i][1];
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1;
        r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1;
        r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    solve8(a);
    for (int i = 0; i < 8; ++i) h[i] = a[i][8];
    h[8] = 1;
}

struct Tap {
    int x0, y0;
    double fx, fy;
    bool inside;
};

Tap sample_tap(const PerspectiveWarp& w, int in_h, int in_w, int y, int x) {
    const double* h = w.h;
    double d = h[6] * x + h[7] * y + h[8];
    double sx = (h[0] * x + h[1] * y + h[2]) / d;
    double sy = (h[3] * x + h[4] * y + h[5]) / d;
    Tap t;
    t.x0 = int(std::floor(sx));
    t.y0 = int(std::floor(sy));
    t.fx = sx - t.x0;
    t.fy = sy - t.y0;
    t.inside = t.x0 >= -1 && t.x0 < in_w && t.y0 >= -1 && t.y0 < in_h;
    return t;
}

} // namespace

Raster rotate180(const Raster& img) {
    Raster out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x) = img.at(img.height - 1 - y, img.width - 1 - x);
    return out;
}

Raster resample(const Raster& img, int out_h, int out_w) {
    Raster out(out_h, out_w);
    double sy = double(img.height) / out_h, sx = double(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double cy = (y + 0.5) * sy - 0.5;
        int y0 = int(std::floor(cy));
        double fy = cy - y0;
        int ya = std::clamp(y0, 0, img.height - 1), yb = std::clamp(y0 + 1, 0, img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double cx = (x + 0.5) * sx - 0.5;
            int x0 = int(std::floor(cx));
            double fx = cx - x0;
            int xa = std::clamp(x0, 0, img.width - 1), xb = std::clamp(x0 + 1, 0, img.width - 1);
            out.at(y, x) = (1 - fy) * ((1 - fx) * img.at(ya, xa) + fx * img.at(ya, xb)) +
                           fy * ((1 - fx) * img.at(yb, xa) + fx * img.at(yb, xb));
        }
    }
    return out;
}

Raster resample_backward(const Raster& out_grad, int in_h, int in_w) {
    Raster in_grad(in_h, in_w);
    double sy = double(in_h) / out_grad.height, sx = double(in_w) / out_grad.width;
    for (int y = 0; y < out_grad.height; ++y) {
        double cy = (y + 0.5) * sy - 0.5;
        int y0 = int(std::floor(cy));
        double fy = cy - y0;
        int ya = std::clamp(y0, 0, in_h - 1), yb = std::clamp(y0 + 1, 0, in_h - 1);
        for (int x = 0; x < out_grad.width; ++x) {
            double cx = (x + 0.5) * sx - 0.5;
            int x0 = int(std::floor(cx));
            double fx = cx - x0;
            int xa = std::clamp(x0, 0, in_w - 1), xb = std::clamp(x0 + 1, 0, in_w - 1);
            double g = out_grad.at(y, x);
            in_grad.at(ya, xa) += (1 - fy) * (1 - fx) * g;
            in_grad.at(ya, xb) += (1 - fy) * fx * g;
            in_grad.at(yb, xa) += fy * (1 - fx) * g;
            in_grad.at(yb, xb) += fy * fx * g;
        }
    }
    return in_grad;
}

PerspectiveWarp random_perspective(int height, int width, double distortion_scale, Rng& rng) {
    double hw = width * 0.5, hh = height * 0.5;
    double dx = distortion_scale * hw, dy = distortion_scale * hh;
    double W = width - 1.0, H = height - 1.0;
    // corner order: top-left, top-right, bottom-right, bottom-left
    double src[4][2] = {{0, 0}, {W, 0}, {W, H}, {0, H}};
    double dst[4][2] = {
        {rng.uniform(0, dx), rng.uniform(0, dy)},
        {W - rng.uniform(0, dx), rng.uniform(0, dy)},
        {W - rng.uniform(0, dx), H - rng.uniform(0, dy)},
        {rng.uniform(0, dx), H - rng.uniform(0, dy)},
    };
    // sampling needs output -> input, so solve the inverse correspondence
    PerspectiveWarp w;
    four_point_homography(dst, src, w.h);
    return w;
}

Raster warp(const Raster& img, const PerspectiveWarp& w) {
    Raster out(img.height, img.width);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            Tap t = sample_tap(w, img.height, img.width, y, x);
            if (!t.inside) continue;
            double v = 0;
            auto px = [&](int yy, int xx) -> double {
                if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) return 0;
                return img.at(yy, xx);
            };
            v += (1 - t.fy) * (1 - t.fx) * px(t.y0, t.x0);
            v += (1 - t.fy) * t.fx * px(t.y0, t.x0 + 1);
            v += t.fy * (1 - t.fx) * px(t.y0 + 1, t.x0);
            v += t.fy * t.fx * px(t.y0 + 1, t.x0 + 1);
            out.at(y, x) = v;
        }
    return out;
}

Raster warp_backward(const Raster& out_grad, const PerspectiveWarp& w, int in_h, int in_w) {
    Raster in_grad(in_h, in_w);
    for (int y = 0; y < out_grad.height; ++y)
        for (int x = 0; x < out_grad.width; ++x) {
            double g = out_grad.at(y, x);
            if (g == 0) continue;
            Tap t = sample_tap(w, in_h, in_w, y, x);
            if (!t.inside) continue;
            auto add = [&](int yy, int xx, double v) {
                if (yy < 0 || yy >= in_h || xx < 0 || xx >= in_w) return;
                in_grad.at(yy, xx) += v;
            };
            add(t.y0, t.x0, (1 - t.fy) * (1 - t.fx) * g);
            add(t.y0, t.x0 + 1, (1 - t.fy) * t.fx * g);
            add(t.y0 + 1, t.x0, t.fy * (1 - t.fx) * g);
            add(t.y0 + 1, t.x0 + 1, t.fy * t.fx * g);
        }
    return in_grad;
}

Raster blur3(const Raster& img) {
    static const double k[3] = {0.25, 0.5, 0.25};
    Raster tmp(img.height, img.width), out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double v = 0;
            for (int i = -1; i <= 1; ++i) {
                int xx = x + i;
                if (xx < 0 || xx >= img.width) continue;
                v += k[i + 1] * img.at(y, xx);
            }
            tmp.at(y, x) = v;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double v = 0;
            for (int i = -1; i <= 1; ++i) {
                int yy = y + i;
                if (yy < 0 || yy >= img.height) continue;
                v += k[i + 1] * tmp.at(yy, x);
            }
            out.at(y, x) = v;
        }
    return out;
}

Raster median3(const Raster& img) {
    Raster out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double v[9];
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int yy = std::clamp(y + dy, 0, img.height - 1);
                    int xx = std::clamp(x + dx, 0, img.width - 1);
                    v[n++] = img.at(yy, xx);
                }
            std::nth_element(v, v + 4, v + 9);
            out.at(y, x) = v[4];
        }
    return out;
}

Raster unsharp(const Raster& img, double amount) {
    Raster low = blur3(img);
    Raster out(img.height, img.width);
    for (size_t i = 0; i < img.size(); ++i)
        out.ink[i] = std::clamp(img.ink[i] + amount * (img.ink[i] - low.ink[i]), 0.0, 1.0);
    return out;
}

} // namespace ambigen
