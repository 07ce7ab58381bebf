#pragma once

#include <cstddef>
#include <vector>

#include "lumen/frame.hpp"

namespace lumen {

/// Per-pixel (dx, dy) displacement in pixels, interleaved.
struct FlowField {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> vectors;

    FlowField() = default;
    FlowField(std::size_t h, std::size_t w) : height(h), width(w), vectors(h * w * 2, 0.0) {}

    double dx(std::size_t y, std::size_t x) const { return vectors[(y * width + x) * 2]; }
    double dy(std::size_t y, std::size_t x) const { return vectors[(y * width + x) * 2 + 1]; }
    double& dx(std::size_t y, std::size_t x) { return vectors[(y * width + x) * 2]; }
    double& dy(std::size_t y, std::size_t x) { return vectors[(y * width + x) * 2 + 1]; }

    double max_magnitude() const;
};

struct FarnebackParams {
    int levels = 2;            // pyramid levels including the full-resolution one
    double pyramid_scale = 0.5;
    int poly_window = 7;       // polynomial expansion neighbourhood (odd)
    double poly_sigma = 1.5;
    int averaging_window = 15; // box window for the displacement normal equations
    int iterations = 3;        // per level
};

/// Dense Farneback flow on luminance. The result satisfies
/// frame_t(x + dx, y + dy) ~= frame_t1(x, y).
FlowField estimate_flow(const Frame& frame_t, const Frame& frame_t1,
                        const FarnebackParams& params = {});

/// Backward bilinear warp: out(x, y) = frame(x + dx, y + dy), clamped to edge.
Frame warp(const Frame& frame, const FlowField& flow);

/// Flow between two single-channel images with the same convention.
FlowField estimate_flow(const Plane& plane_t, const Plane& plane_t1, const FarnebackParams& params = {});

}  // namespace lumen
