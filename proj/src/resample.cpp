#include "lumen/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lumen/error.hpp"
#include "lumen/parallel.hpp"

namespace lumen {

namespace {

struct Tap {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double weight_hi = 0.0;
};

// Half-pixel-centre source taps for each output index along one axis.
std::vector<Tap> axis_taps(std::size_t in, std::size_t out) {
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const double max_pos = static_cast<double>(in - 1);
    for (std::size_t i = 0; i < out; ++i) {
        double pos = (static_cast<double>(i) + 0.5) * scale - 0.5;
        pos = std::clamp(pos, 0.0, max_pos);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        taps[i].lo = lo;
        taps[i].hi = std::min(lo + 1, in - 1);
        taps[i].weight_hi = pos - static_cast<double>(lo);
    }
    return taps;
}

}  // namespace

std::vector<double> resample_interleaved(std::span<const double> src, std::size_t height,
                                         std::size_t width, std::size_t channels,
                                         std::size_t out_height, std::size_t out_width) {
    if (out_height == 0 || out_width == 0) {
        throw ValidationError("degenerate resample target " + std::to_string(out_height) + "x" +
                              std::to_string(out_width));
    }
    if (height == 0 || width == 0) throw ValidationError("cannot resample an empty image");
    if (src.size() != height * width * channels) throw DimensionError("resample: buffer size mismatch");
    if (out_height == height && out_width == width) return {src.begin(), src.end()};

    const auto ty = axis_taps(height, out_height);
    const auto tx = axis_taps(width, out_width);
    std::vector<double> out(out_height * out_width * channels);
    parallel_for(out_height, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            const Tap& vy = ty[y];
            const double* row_lo = src.data() + vy.lo * width * channels;
            const double* row_hi = src.data() + vy.hi * width * channels;
            double* dst = out.data() + y * out_width * channels;
            for (std::size_t x = 0; x < out_width; ++x) {
                const Tap& vx = tx[x];
                for (std::size_t c = 0; c < channels; ++c) {
                    const double a = row_lo[vx.lo * channels + c];
                    const double b = row_lo[vx.hi * channels + c];
                    const double cc = row_hi[vx.lo * channels + c];
                    const double d = row_hi[vx.hi * channels + c];
                    const double top = a + (b - a) * vx.weight_hi;
                    const double bottom = cc + (d - cc) * vx.weight_hi;
                    dst[x * channels + c] = top + (bottom - top) * vy.weight_hi;
                }
            }
        }
    });
    return out;
}

Plane resample(const Plane& plane, std::size_t out_height, std::size_t out_width) {
    Plane out;
    out.height = out_height;
    out.width = out_width;
    out.values = resample_interleaved(plane.values, plane.height, plane.width, 1, out_height, out_width);
    return out;
}

Frame resample(const Frame& frame, std::size_t out_height, std::size_t out_width) {
    auto values = resample_interleaved(frame.data(), frame.height(), frame.width(), Frame::kChannels,
                                       out_height, out_width);
    // Convex combinations of [0, 1] values can round a hair outside the range.
    for (double& v : values) v = std::clamp(v, 0.0, 1.0);
    return Frame(out_height, out_width, std::move(values));
}

Frame downsample(const Frame& frame, int divisor) {
    if (divisor < 1) throw ValidationError("down-sampling divisor must be >= 1");
    if (divisor == 1) return frame;
    const std::size_t h = frame.height() / static_cast<std::size_t>(divisor);
    const std::size_t w = frame.width() / static_cast<std::size_t>(divisor);
    return resample(frame, h, w);
}

}  // namespace lumen
