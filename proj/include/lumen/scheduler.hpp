#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lumen/curves.hpp"
#include "lumen/frame.hpp"
#include "lumen/net.hpp"
#include "lumen/reuse.hpp"

namespace lumen {

struct LatencyLog {
    std::vector<double> per_frame_ms;

    double mean_ms() const;
};

/// Enhances a stream frame by frame under a ReuseConfig. Owns the gamma map
/// and activation cache carried between frames, so one instance serves one
/// stream. A new config takes effect at the next frame, which starts a new
/// keyframe period.
class StreamEnhancer {
public:
    StreamEnhancer(NetworkSpec spec, ReuseConfig config);

    struct Step {
        Frame output;
        FramePlan plan;
        double latency_ms = 0.0;
        /// Layer entries evaluated by the network for this frame.
        std::size_t layers_computed = 0;
    };

    Step process(const Frame& frame);

    void set_config(const ReuseConfig& config);
    const ReuseConfig& config() const { return config_; }
    /// Forces the next frame to be a fully computed keyframe.
    void restart_period();

    const NetworkSpec& network() const { return spec_; }
    /// Full-resolution gamma map applied to the most recent frame.
    const GammaMap& last_gamma() const { return gamma_; }
    std::size_t frames_processed() const { return frame_index_; }

private:
    NetworkSpec spec_;
    ReuseConfig config_;
    std::size_t reused_prefix_ = 0;
    std::size_t frame_index_ = 0;
    std::size_t period_position_ = 0;
    bool have_gamma_ = false;
    GammaMap gamma_;
    ActivationCache cache_;
};

struct EnhanceResult {
    FrameSequence output;
    std::vector<FramePlan> plans;
    LatencyLog latency;
    std::vector<std::size_t> layers_computed;
    /// Filled only when requested.
    std::vector<GammaMap> gammas;
};

EnhanceResult enhance_sequence(const FrameSequence& seq, const NetworkSpec& spec,
                               const ReuseConfig& config, bool keep_gamma_maps = false);

/// plan.json: the config plus one entry per frame with its action,
/// resolution factor and latency.
std::string plan_to_json(const ReuseConfig& config, const std::vector<FramePlan>& plans,
                         const LatencyLog& latency);

}  // namespace lumen
