#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lumen {

/// Decision variables of the enhancer.
struct ReuseConfig {
    static constexpr int kMaxFrameReuse = 10;
    static constexpr int kMaxLayerReuse = 3;

    int theta_f = 0;          ///< frames reusing the last gamma map per keyframe, 0..10
    int theta_l = 0;          ///< leading conv layers reused on compute frames, 0..3
    int theta_d_divisor = 1;  ///< input down-sampling rate is 1 / divisor, divisor in {1, 2, 3}

    double theta_d() const { return 1.0 / theta_d_divisor; }

    /// Throws ValidationError when a field is outside its set.
    void validate() const;
    bool valid() const;

    friend auto operator<=>(const ReuseConfig&, const ReuseConfig&) = default;
};

/// "1", "1/2" or "1/3" -> divisor.
int parse_theta_d(std::string_view text);
std::string theta_d_string(int divisor);
std::string to_string(const ReuseConfig& config);

enum class FrameAction { FullCompute, PartialCompute, ReuseMap };

std::string_view to_string(FrameAction action);

struct FramePlan {
    std::size_t frame_index = 0;
    FrameAction action = FrameAction::FullCompute;
    int resolution_divisor = 1;

    friend bool operator==(const FramePlan&, const FramePlan&) = default;
};

/// Keyframes every theta_f + 1 frames are computed (partially when
/// theta_l > 0, except for the very first frame); the theta_f frames after
/// each keyframe reuse its gamma map.
std::vector<FramePlan> expand_config(const ReuseConfig& config, std::size_t n_frames);

}  // namespace lumen
