#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lumen {

/// An RGB image with channels in [0, 1], stored row-major as interleaved
/// (r, g, b) triples.
class Frame {
public:
    static constexpr std::size_t kChannels = 3;

    Frame() = default;
    Frame(std::size_t height, std::size_t width, double fill = 0.0);
    /// Takes ownership of `data`; throws ValidationError when the length or
    /// any channel value is out of contract.
    Frame(std::size_t height, std::size_t width, std::vector<double> data);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixel_count() const { return height_ * width_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> data() const { return data_; }
    /// Writable view. Callers are responsible for keeping values in [0, 1].
    std::span<double> mutable_data() { return data_; }

    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * width_ + x) * kChannels + c];
    }
    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return data_[(y * width_ + x) * kChannels + c];
    }

    bool same_shape(const Frame& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    /// Throws ValidationError if the frame breaks its invariants.
    void validate() const;

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Frames in temporal order, all of the same size.
struct FrameSequence {
    std::vector<Frame> frames;
    std::optional<double> frame_rate;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    const Frame& operator[](std::size_t i) const { return frames[i]; }

    /// Throws DimensionError on mixed sizes.
    void validate() const;
};

/// Single-channel real image, row-major.
struct Plane {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    Plane() = default;
    Plane(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w, fill) {}

    double& operator()(std::size_t y, std::size_t x) { return values[y * width + x]; }
    double operator()(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// Y = 0.299 R + 0.587 G + 0.114 B
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

Plane luminance(const Frame& frame);
double mean_luminance(const Frame& frame);

void require_same_shape(const Frame& a, const Frame& b, const char* what);

}  // namespace lumen
