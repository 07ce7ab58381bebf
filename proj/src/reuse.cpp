#include "lumen/reuse.hpp"

#include <string>

#include "lumen/error.hpp"

namespace lumen {

bool ReuseConfig::valid() const {
    return theta_f >= 0 && theta_f <= kMaxFrameReuse && theta_l >= 0 && theta_l <= kMaxLayerReuse &&
           theta_d_divisor >= 1 && theta_d_divisor <= 3;
}

void ReuseConfig::validate() const {
    if (!valid()) throw ValidationError("invalid reuse config " + to_string(*this));
}

int parse_theta_d(std::string_view text) {
    if (text == "1") return 1;
    if (text == "1/2") return 2;
    if (text == "1/3") return 3;
    throw ValidationError("theta_d must be one of 1, 1/2, 1/3 (got '" + std::string(text) + "')");
}

std::string theta_d_string(int divisor) {
    return divisor == 1 ? "1" : "1/" + std::to_string(divisor);
}

std::string to_string(const ReuseConfig& config) {
    return "(" + std::to_string(config.theta_f) + ", " + std::to_string(config.theta_l) + ", " +
           theta_d_string(config.theta_d_divisor) + ")";
}

std::string_view to_string(FrameAction action) {
    switch (action) {
        case FrameAction::FullCompute: return "full_compute";
        case FrameAction::PartialCompute: return "partial_compute";
        case FrameAction::ReuseMap: return "reuse_map";
    }
    return "unknown";
}

std::vector<FramePlan> expand_config(const ReuseConfig& config, std::size_t n_frames) {
    config.validate();
    std::vector<FramePlan> plans(n_frames);
    const auto period = static_cast<std::size_t>(config.theta_f) + 1;
    for (std::size_t i = 0; i < n_frames; ++i) {
        FramePlan& p = plans[i];
        p.frame_index = i;
        p.resolution_divisor = config.theta_d_divisor;
        if (i % period != 0) {
            p.action = FrameAction::ReuseMap;
        } else if (i == 0 || config.theta_l == 0) {
            p.action = FrameAction::FullCompute;
        } else {
            p.action = FrameAction::PartialCompute;
        }
    }
    return plans;
}

}  // namespace lumen
