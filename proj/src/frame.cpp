#include "lumen/frame.hpp"

#include <cmath>
#include <string>

#include "lumen/error.hpp"

namespace lumen {

Frame::Frame(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width * kChannels, fill) {
    if (!(fill >= 0.0 && fill <= 1.0)) throw ValidationError("frame fill value outside [0, 1]");
}

Frame::Frame(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    validate();
}

void Frame::validate() const {
    if (data_.size() != height_ * width_ * kChannels) {
        throw ValidationError("frame data length " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(height_) + "x" +
                              std::to_string(width_) + "x3");
    }
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("frame channel value " + std::to_string(v) + " outside [0, 1]");
        }
    }
}

void FrameSequence::validate() const {
    if (frames.empty()) return;
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front())) {
            throw DimensionError("sequence frames have mixed dimensions: " +
                                 std::to_string(frames.front().height()) + "x" +
                                 std::to_string(frames.front().width()) + " vs " +
                                 std::to_string(f.height()) + "x" + std::to_string(f.width()));
        }
    }
}

Plane luminance(const Frame& frame) {
    Plane out(frame.height(), frame.width());
    const auto src = frame.data();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = luma(src[i * 3], src[i * 3 + 1], src[i * 3 + 2]);
    }
    return out;
}

double mean_luminance(const Frame& frame) {
    const auto src = frame.data();
    const std::size_t n = frame.pixel_count();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += luma(src[i * 3], src[i * 3 + 1], src[i * 3 + 2]);
    return sum / static_cast<double>(n);
}

void require_same_shape(const Frame& a, const Frame& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": frame dimensions differ (" +
                             std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                             " vs " + std::to_string(b.height()) + "x" +
                             std::to_string(b.width()) + ")");
    }
}

}  // namespace lumen
