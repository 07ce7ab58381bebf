#include "lumen/curves.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lumen/error.hpp"
#include "lumen/parallel.hpp"
#include "lumen/resample.hpp"

namespace lumen {

GammaMap::GammaMap(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), exponents_(height * width * 3, fill) {
    if (!(fill > 0.0) || !std::isfinite(fill)) throw ValidationError("gamma exponents must be positive");
}

GammaMap::GammaMap(std::size_t height, std::size_t width, std::vector<double> exponents)
    : height_(height), width_(width), exponents_(std::move(exponents)) {
    validate();
}

void GammaMap::validate() const {
    if (exponents_.size() != height_ * width_ * 3) throw ValidationError("gamma map length mismatch");
    for (double g : exponents_) {
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw ValidationError("gamma exponent " + std::to_string(g) + " is not strictly positive");
        }
    }
}

bool GammaMap::within(double lo, double hi) const {
    return std::all_of(exponents_.begin(), exponents_.end(), [&](double g) { return g >= lo && g <= hi; });
}

double GammaMap::mean() const {
    if (exponents_.empty()) return 0.0;
    return std::accumulate(exponents_.begin(), exponents_.end(), 0.0) / static_cast<double>(exponents_.size());
}

CurveParamMap::CurveParamMap(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), params_(height * width * 3, fill) {
    validate();
}

CurveParamMap::CurveParamMap(std::size_t height, std::size_t width, std::vector<double> params)
    : height_(height), width_(width), params_(std::move(params)) {
    validate();
}

void CurveParamMap::validate() const {
    if (params_.size() != height_ * width_ * 3) throw ValidationError("curve parameter map length mismatch");
    for (double a : params_) {
        if (!(std::abs(a) <= 1.0)) throw ValidationError("curve parameter " + std::to_string(a) + " outside [-1, 1]");
    }
}

GammaMap resample(const GammaMap& map, std::size_t out_height, std::size_t out_width) {
    return GammaMap(out_height, out_width,
                    resample_interleaved(map.exponents(), map.height(), map.width(), 3, out_height, out_width));
}

Frame apply_gamma_curve(const Frame& frame, const GammaMap& gamma) {
    if (frame.height() != gamma.height() || frame.width() != gamma.width()) {
        throw DimensionError("gamma map " + std::to_string(gamma.height()) + "x" + std::to_string(gamma.width()) +
                             " does not match frame " + std::to_string(frame.height()) + "x" +
                             std::to_string(frame.width()));
    }
    gamma.validate();
    Frame out(frame.height(), frame.width());
    const auto in = frame.data();
    const auto g = gamma.exponents();
    auto dst = out.mutable_data();
    parallel_for(frame.height(), [&](std::size_t y0, std::size_t y1) {
        const std::size_t begin = y0 * frame.width() * 3;
        const std::size_t end = y1 * frame.width() * 3;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = in[i];
            dst[i] = v <= 0.0 ? 0.0 : std::min(std::pow(v, g[i]), 1.0);
        }
    });
    return out;
}

Frame apply_iterative_gamma(const Frame& frame, std::span<const GammaMap> gammas) {
    if (gammas.empty()) throw ValidationError("iterative gamma needs at least one map");
    Frame current = frame;
    for (const auto& g : gammas) current = apply_gamma_curve(current, g);
    return current;
}

Frame apply_quadratic_curve(const Frame& frame, std::span<const CurveParamMap> params, int iterations,
                            ParamMapUse use) {
    if (iterations < 1) throw ValidationError("quadratic curve needs at least one iteration");
    const std::size_t expected = use == ParamMapUse::Shared ? 1 : static_cast<std::size_t>(iterations);
    if (params.size() != expected) {
        throw ValidationError("quadratic curve expects " + std::to_string(expected) + " parameter map(s), got " +
                              std::to_string(params.size()));
    }
    for (const auto& p : params) {
        if (p.height() != frame.height() || p.width() != frame.width()) {
            throw DimensionError("curve parameter map does not match frame dimensions");
        }
        p.validate();
    }
    Frame out = frame;
    auto e = out.mutable_data();
    for (int n = 0; n < iterations; ++n) {
        const auto a = params[use == ParamMapUse::Shared ? 0 : static_cast<std::size_t>(n)].params();
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double v = e[i];
            e[i] = std::clamp(v + a[i] * v * (1.0 - v), 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace lumen
