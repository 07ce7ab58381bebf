#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lumen/frame.hpp"

namespace lumen {

/// Bilinear resampling of an interleaved image with `channels` values per
/// pixel. Sample centres sit at (i + 0.5) / N and out-of-range taps clamp to
/// the edge. Equal sizes return an exact copy.
std::vector<double> resample_interleaved(std::span<const double> src, std::size_t height,
                                         std::size_t width, std::size_t channels,
                                         std::size_t out_height, std::size_t out_width);

Plane resample(const Plane& plane, std::size_t out_height, std::size_t out_width);
Frame resample(const Frame& frame, std::size_t out_height, std::size_t out_width);

/// Downsamples by 1/divisor: output is floor(dim / divisor). divisor 1 is the
/// identity.
Frame downsample(const Frame& frame, int divisor);

}  // namespace lumen
