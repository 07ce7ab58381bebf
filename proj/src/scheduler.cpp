#include "lumen/scheduler.hpp"

#include <chrono>
#include <numeric>

#include "json.hpp"
#include "lumen/error.hpp"
#include "lumen/resample.hpp"

namespace lumen {

double LatencyLog::mean_ms() const {
    if (per_frame_ms.empty()) return 0.0;
    return std::accumulate(per_frame_ms.begin(), per_frame_ms.end(), 0.0) / static_cast<double>(per_frame_ms.size());
}

StreamEnhancer::StreamEnhancer(NetworkSpec spec, ReuseConfig config) : spec_(std::move(spec)) {
    spec_.validate();
    set_config(config);
}

void StreamEnhancer::set_config(const ReuseConfig& config) {
    config.validate();
    reused_prefix_ = reused_prefix_length(spec_, config.theta_l);
    config_ = config;
    restart_period();
}

void StreamEnhancer::restart_period() {
    period_position_ = 0;
    cache_ = {};
}

StreamEnhancer::Step StreamEnhancer::process(const Frame& frame) {
    const auto start = std::chrono::steady_clock::now();
    Step step;
    step.plan.frame_index = frame_index_;
    step.plan.resolution_divisor = config_.theta_d_divisor;

    const bool keyframe = period_position_ == 0 || !have_gamma_ || gamma_.height() != frame.height() ||
                          gamma_.width() != frame.width();
    if (keyframe) {
        const Frame input = downsample(frame, config_.theta_d_divisor);
        const bool partial = reused_prefix_ > 0 && !cache_.empty() && cache_.height == input.height() &&
                             cache_.width == input.width();
        ForwardResult result = partial ? forward_partial(spec_, input, cache_, config_.theta_l)
                                       : forward_cached(spec_, input);
        step.plan.action = partial ? FrameAction::PartialCompute : FrameAction::FullCompute;
        step.layers_computed = result.layers_computed;
        cache_ = std::move(result.cache);
        gamma_ = config_.theta_d_divisor == 1 ? std::move(result.gamma)
                                              : resample(result.gamma, frame.height(), frame.width());
        have_gamma_ = true;
        period_position_ = 0;
    } else {
        step.plan.action = FrameAction::ReuseMap;
    }
    step.output = apply_gamma_curve(frame, gamma_);

    period_position_ = (period_position_ + 1) % (static_cast<std::size_t>(config_.theta_f) + 1);
    ++frame_index_;
    step.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return step;
}

EnhanceResult enhance_sequence(const FrameSequence& seq, const NetworkSpec& spec, const ReuseConfig& config,
                               bool keep_gamma_maps) {
    if (seq.empty()) throw ValidationError("cannot enhance an empty sequence");
    seq.validate();
    StreamEnhancer enhancer(spec, config);
    EnhanceResult result;
    result.output.frame_rate = seq.frame_rate;
    result.output.frames.reserve(seq.size());
    for (const auto& frame : seq.frames) {
        auto step = enhancer.process(frame);
        result.output.frames.push_back(std::move(step.output));
        result.plans.push_back(step.plan);
        result.latency.per_frame_ms.push_back(step.latency_ms);
        result.layers_computed.push_back(step.layers_computed);
        if (keep_gamma_maps) result.gammas.push_back(enhancer.last_gamma());
    }
    return result;
}

std::string plan_to_json(const ReuseConfig& config, const std::vector<FramePlan>& plans, const LatencyLog& latency) {
    nlohmann::json doc;
    doc["config"] = {{"theta_f", config.theta_f},
                     {"theta_l", config.theta_l},
                     {"theta_d", theta_d_string(config.theta_d_divisor)}};
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t i = 0; i < plans.size(); ++i) {
        nlohmann::json f;
        f["frame_index"] = plans[i].frame_index;
        f["action"] = std::string(to_string(plans[i].action));
        f["resolution_factor"] = theta_d_string(plans[i].resolution_divisor);
        f["latency_ms"] = i < latency.per_frame_ms.size() ? latency.per_frame_ms[i] : 0.0;
        frames.push_back(std::move(f));
    }
    doc["frames"] = std::move(frames);
    doc["mean_latency_ms"] = latency.mean_ms();
    return doc.dump(2);
}

}  // namespace lumen
