#include "lumen/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lumen/error.hpp"
#include "lumen/parallel.hpp"
#include "lumen/resample.hpp"

namespace lumen {

double FlowField::max_magnitude() const {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < vectors.size(); i += 2) {
        best = std::max(best, std::hypot(vectors[i], vectors[i + 1]));
    }
    return best;
}

namespace {

// Local quadratic model f(x, y) ~ c + b1 x + b2 y + a11 x^2 + a22 y^2 + a12 x y
// around each pixel; planes hold b1, b2, a11, a22, a12.
struct PolyPlanes {
    std::size_t height = 0;
    std::size_t width = 0;
    std::array<std::vector<double>, 5> coef;
};

// Weighted least-squares projector: coefficients = P * samples, one row per
// basis function {1, x, y, x^2, y^2, xy}.
std::vector<std::array<double, 6>> poly_projector(int window, double sigma) {
    const int r = window / 2;
    const std::size_t n = static_cast<std::size_t>(window * window);
    std::vector<std::array<double, 6>> basis(n);
    std::vector<double> weight(n);
    std::size_t idx = 0;
    for (int y = -r; y <= r; ++y) {
        for (int x = -r; x <= r; ++x, ++idx) {
            basis[idx] = {1.0, double(x), double(y), double(x * x), double(y * y), double(x * y)};
            weight[idx] = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    }
    // Normal matrix G = B^T W B, augmented with the identity for inversion.
    std::array<std::array<double, 12>, 6> aug{};
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += basis[k][i] * weight[k] * basis[k][j];
            aug[i][j] = s;
        }
        aug[i][6 + i] = 1.0;
    }
    for (std::size_t col = 0; col < 6; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < 6; ++row) {
            if (std::abs(aug[row][col]) > std::abs(aug[pivot][col])) pivot = row;
        }
        std::swap(aug[col], aug[pivot]);
        const double inv = 1.0 / aug[col][col];
        for (double& v : aug[col]) v *= inv;
        for (std::size_t row = 0; row < 6; ++row) {
            if (row == col) continue;
            const double f = aug[row][col];
            for (std::size_t j = 0; j < 12; ++j) aug[row][j] -= f * aug[col][j];
        }
    }
    std::vector<std::array<double, 6>> proj(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < 6; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 6; ++j) s += aug[i][6 + j] * basis[k][j];
            proj[k][i] = s * weight[k];
        }
    }
    return proj;
}

PolyPlanes poly_expansion(const Plane& img, int window, double sigma) {
    const auto proj = poly_projector(window, sigma);
    const int r = window / 2;
    const long h = static_cast<long>(img.height);
    const long w = static_cast<long>(img.width);
    PolyPlanes out;
    out.height = img.height;
    out.width = img.width;
    for (auto& c : out.coef) c.assign(img.values.size(), 0.0);
    parallel_for(img.height, [&](std::size_t y0, std::size_t y1) {
        for (long y = static_cast<long>(y0); y < static_cast<long>(y1); ++y) {
            for (long x = 0; x < w; ++x) {
                std::array<double, 6> acc{};
                std::size_t k = 0;
                for (long dy = -r; dy <= r; ++dy) {
                    const long sy = std::clamp(y + dy, 0L, h - 1);
                    for (long dx = -r; dx <= r; ++dx, ++k) {
                        const long sx = std::clamp(x + dx, 0L, w - 1);
                        const double v = img.values[static_cast<std::size_t>(sy * w + sx)];
                        for (std::size_t i = 1; i < 6; ++i) acc[i] += proj[k][i] * v;
                    }
                }
                const auto idx = static_cast<std::size_t>(y * w + x);
                for (std::size_t i = 0; i < 5; ++i) out.coef[i][idx] = acc[i + 1];
            }
        }
    });
    return out;
}

double sample_clamped(const std::vector<double>& plane, std::size_t height, std::size_t width, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, width - 1);
    const std::size_t y1 = std::min(y0 + 1, height - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    const double top = plane[y0 * width + x0] * (1 - fx) + plane[y0 * width + x1] * fx;
    const double bottom = plane[y1 * width + x0] * (1 - fx) + plane[y1 * width + x1] * fx;
    return top * (1 - fy) + bottom * fy;
}

// Per-pixel normal equations G d = h for the displacement: planes hold
// G11, G12, G22, h1, h2.
using Normals = std::array<std::vector<double>, 5>;

Normals update_matrices(const PolyPlanes& prev, const PolyPlanes& next, const FlowField& flow) {
    const std::size_t h = prev.height;
    const std::size_t w = prev.width;
    Normals m;
    for (auto& p : m) p.assign(h * w, 0.0);
    parallel_for(h, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                const double dx = flow.vectors[i * 2];
                const double dy = flow.vectors[i * 2 + 1];
                const double fx = static_cast<double>(x) + dx;
                const double fy = static_cast<double>(y) + dy;
                if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(w - 1) || fy > static_cast<double>(h - 1)) {
                    continue;  // no evidence where the displaced point leaves the image
                }
                std::array<double, 5> n{};
                for (std::size_t c = 0; c < 5; ++c) n[c] = sample_clamped(next.coef[c], h, w, fx, fy);
                // A = [[a11, a12/2], [a12/2, a22]] averaged over both frames.
                const double a11 = 0.5 * (prev.coef[2][i] + n[2]);
                const double a22 = 0.5 * (prev.coef[3][i] + n[3]);
                const double a12 = 0.25 * (prev.coef[4][i] + n[4]);
                // delta_b = (b_prev - b_next) / 2 + A d
                const double b1 = 0.5 * (prev.coef[0][i] - n[0]) + a11 * dx + a12 * dy;
                const double b2 = 0.5 * (prev.coef[1][i] - n[1]) + a12 * dx + a22 * dy;
                m[0][i] = a11 * a11 + a12 * a12;
                m[1][i] = a12 * (a11 + a22);
                m[2][i] = a12 * a12 + a22 * a22;
                m[3][i] = a11 * b1 + a12 * b2;
                m[4][i] = a12 * b1 + a22 * b2;
            }
        }
    });
    return m;
}

std::vector<double> box_blur(const std::vector<double>& src, std::size_t h, std::size_t w, int window) {
    const long r = window / 2;
    const double norm = 1.0 / static_cast<double>(window);
    std::vector<double> tmp(src.size());
    std::vector<double> out(src.size());
    const long lw = static_cast<long>(w);
    const long lh = static_cast<long>(h);
    for (long y = 0; y < lh; ++y) {
        for (long x = 0; x < lw; ++x) {
            double s = 0.0;
            for (long k = -r; k <= r; ++k) s += src[static_cast<std::size_t>(y * lw + std::clamp(x + k, 0L, lw - 1))];
            tmp[static_cast<std::size_t>(y * lw + x)] = s * norm;
        }
    }
    for (long y = 0; y < lh; ++y) {
        for (long x = 0; x < lw; ++x) {
            double s = 0.0;
            for (long k = -r; k <= r; ++k) s += tmp[static_cast<std::size_t>(std::clamp(y + k, 0L, lh - 1) * lw + x)];
            out[static_cast<std::size_t>(y * lw + x)] = s * norm;
        }
    }
    return out;
}

void update_flow(const Normals& m, FlowField& flow, int window) {
    Normals blurred;
    for (std::size_t c = 0; c < 5; ++c) blurred[c] = box_blur(m[c], flow.height, flow.width, window);
    // Tiny Tikhonov term: keeps textureless neighbourhoods (G ~ 0) at zero motion
    // without swamping low-contrast texture, where det(G) can be well below 1e-3.
    constexpr double kRegularizer = 1e-9;
    for (std::size_t i = 0; i < flow.height * flow.width; ++i) {
        const double g11 = blurred[0][i];
        const double g12 = blurred[1][i];
        const double g22 = blurred[2][i];
        const double h1 = blurred[3][i];
        const double h2 = blurred[4][i];
        const double det = g11 * g22 - g12 * g12 + kRegularizer;
        double dx = (g22 * h1 - g12 * h2) / det;
        double dy = (g11 * h2 - g12 * h1) / det;
        if (!std::isfinite(dx) || !std::isfinite(dy)) dx = dy = 0.0;
        flow.vectors[i * 2] = dx;
        flow.vectors[i * 2 + 1] = dy;
    }
}

Plane gaussian_blur(const Plane& img, double sigma) {
    if (sigma <= 0.0) return img;
    const long r = std::max(1L, static_cast<long>(std::lround(sigma * 2.5)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (long k = -r; k <= r; ++k) {
        kernel[static_cast<std::size_t>(k + r)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += kernel[static_cast<std::size_t>(k + r)];
    }
    for (double& v : kernel) v /= sum;
    const long w = static_cast<long>(img.width);
    const long h = static_cast<long>(img.height);
    Plane tmp(img.height, img.width);
    Plane out(img.height, img.width);
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            double s = 0.0;
            for (long k = -r; k <= r; ++k) s += kernel[static_cast<std::size_t>(k + r)] * img(y, std::clamp(x + k, 0L, w - 1));
            tmp(y, x) = s;
        }
    }
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            double s = 0.0;
            for (long k = -r; k <= r; ++k) s += kernel[static_cast<std::size_t>(k + r)] * tmp(std::clamp(y + k, 0L, h - 1), x);
            out(y, x) = s;
        }
    }
    return out;
}

}  // namespace

FlowField estimate_flow(const Plane& plane_t, const Plane& plane_t1, const FarnebackParams& params) {
    if (plane_t.height != plane_t1.height || plane_t.width != plane_t1.width) {
        throw DimensionError("estimate_flow: frame dimensions differ");
    }
    if (params.levels < 1 || params.iterations < 1 || params.poly_window < 3 || params.poly_window % 2 == 0 ||
        params.averaging_window < 1 || !(params.pyramid_scale > 0.0 && params.pyramid_scale < 1.0)) {
        throw ValidationError("invalid Farneback parameters");
    }
    // Internally the flow runs prev = t1 -> next = t so that t1(x) ~ t(x + d).
    Plane prev = plane_t1;
    Plane next = plane_t;
    for (double& v : prev.values) v *= 255.0;
    for (double& v : next.values) v *= 255.0;

    FlowField flow;
    for (int level = params.levels - 1; level >= 0; --level) {
        const double scale = std::pow(params.pyramid_scale, level);
        const auto lh = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(prev.height * scale)));
        const auto lw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(prev.width * scale)));
        Plane p = prev;
        Plane n = next;
        if (level > 0) {
            const double sigma = (1.0 / scale - 1.0) * 0.5;
            p = resample(gaussian_blur(prev, sigma), lh, lw);
            n = resample(gaussian_blur(next, sigma), lh, lw);
        }
        if (flow.vectors.empty()) {
            flow = FlowField(lh, lw);
        } else {
            FlowField up(lh, lw);
            up.vectors = resample_interleaved(flow.vectors, flow.height, flow.width, 2, lh, lw);
            for (double& v : up.vectors) v /= params.pyramid_scale;
            flow = std::move(up);
        }
        const PolyPlanes rp = poly_expansion(p, params.poly_window, params.poly_sigma);
        const PolyPlanes rn = poly_expansion(n, params.poly_window, params.poly_sigma);
        for (int it = 0; it < params.iterations; ++it) {
            update_flow(update_matrices(rp, rn, flow), flow, params.averaging_window);
        }
    }
    return flow;
}

FlowField estimate_flow(const Frame& frame_t, const Frame& frame_t1, const FarnebackParams& params) {
    require_same_shape(frame_t, frame_t1, "estimate_flow");
    return estimate_flow(luminance(frame_t), luminance(frame_t1), params);
}

Frame warp(const Frame& frame, const FlowField& flow) {
    if (flow.height != frame.height() || flow.width != frame.width()) {
        throw DimensionError("warp: flow " + std::to_string(flow.height) + "x" + std::to_string(flow.width) +
                             " does not match frame " + std::to_string(frame.height()) + "x" +
                             std::to_string(frame.width()));
    }
    const std::size_t h = frame.height();
    const std::size_t w = frame.width();
    Frame out(h, w);
    const auto src = frame.data();
    auto dst = out.mutable_data();
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const double dx = flow.vectors[i * 2];
            const double dy = flow.vectors[i * 2 + 1];
            if (dx == 0.0 && dy == 0.0) {
                for (std::size_t c = 0; c < 3; ++c) dst[i * 3 + c] = src[i * 3 + c];
                continue;
            }
            const double sx = std::clamp(static_cast<double>(x) + dx, 0.0, static_cast<double>(w - 1));
            const double sy = std::clamp(static_cast<double>(y) + dy, 0.0, static_cast<double>(h - 1));
            const auto x0 = static_cast<std::size_t>(std::floor(sx));
            const auto y0 = static_cast<std::size_t>(std::floor(sy));
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const std::size_t y1 = std::min(y0 + 1, h - 1);
            const double fx = sx - static_cast<double>(x0);
            const double fy = sy - static_cast<double>(y0);
            for (std::size_t c = 0; c < 3; ++c) {
                const double a = src[(y0 * w + x0) * 3 + c];
                const double b = src[(y0 * w + x1) * 3 + c];
                const double cc = src[(y1 * w + x0) * 3 + c];
                const double d = src[(y1 * w + x1) * 3 + c];
                const double top = a + (b - a) * fx;
                const double bottom = cc + (d - cc) * fx;
                dst[i * 3 + c] = std::clamp(top + (bottom - top) * fy, 0.0, 1.0);
            }
        }
    }
    return out;
}

}  // namespace lumen
