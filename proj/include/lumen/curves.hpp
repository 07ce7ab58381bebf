#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lumen/frame.hpp"

namespace lumen {

inline constexpr double kGammaMin = 0.25;
inline constexpr double kGammaMax = 4.0;

/// Per-pixel, per-RGB-channel exponents, laid out like Frame data.
/// Exponents are finite and strictly positive.
class GammaMap {
public:
    GammaMap() = default;
    GammaMap(std::size_t height, std::size_t width, double fill = 1.0);
    GammaMap(std::size_t height, std::size_t width, std::vector<double> exponents);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::span<const double> exponents() const { return exponents_; }
    std::span<double> mutable_exponents() { return exponents_; }

    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return exponents_[(y * width_ + x) * 3 + c];
    }
    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return exponents_[(y * width_ + x) * 3 + c];
    }

    void validate() const;
    bool within(double lo, double hi) const;
    double mean() const;

    friend bool operator==(const GammaMap&, const GammaMap&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> exponents_;
};

/// Per-pixel, per-channel quadratic curve parameters in [-1, 1].
class CurveParamMap {
public:
    CurveParamMap() = default;
    CurveParamMap(std::size_t height, std::size_t width, double fill = 0.0);
    CurveParamMap(std::size_t height, std::size_t width, std::vector<double> params);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::span<const double> params() const { return params_; }

    void validate() const;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> params_;
};

GammaMap resample(const GammaMap& map, std::size_t out_height, std::size_t out_width);

/// out = in ^ gamma per pixel and channel, with 0 ^ gamma = 0.
Frame apply_gamma_curve(const Frame& frame, const GammaMap& gamma);

/// Repeated power curve E_n = E_{n-1} ^ gamma_n, kept for iteration ablations.
Frame apply_iterative_gamma(const Frame& frame, std::span<const GammaMap> gammas);

enum class ParamMapUse {
    PerIteration,  ///< one map per iteration
    Shared,        ///< a single map reused at every iteration
};

/// Quadratic light-enhancement curve iterated `iterations` times:
/// E_n = E_{n-1} + A_n * E_{n-1} * (1 - E_{n-1}),  E_0 = input.
Frame apply_quadratic_curve(const Frame& frame, std::span<const CurveParamMap> params,
                            int iterations, ParamMapUse use = ParamMapUse::PerIteration);

}  // namespace lumen
