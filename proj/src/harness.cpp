#include "lumen/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lumen/error.hpp"
#include "lumen/metrics.hpp"
#include "lumen/scheduler.hpp"

namespace lumen {

std::vector<BudgetSnapshot> parse_budget_trace(std::string_view csv_text) {
    std::istringstream in{std::string(csv_text)};
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty budget trace");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,supply_fraction,epsilon") {
        throw FormatError("budget trace header must be 'time_s,supply_fraction,epsilon'");
    }
    std::vector<BudgetSnapshot> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        BudgetSnapshot row;
        char c1 = 0;
        char c2 = 0;
        if (!(ss >> row.time_s >> c1 >> row.supply_fraction >> c2 >> row.epsilon) || c1 != ',' || c2 != ',' ||
            !(ss >> std::ws).eof()) {
            throw FormatError("budget trace line " + std::to_string(lineno) + " is malformed");
        }
        try {
            row.validate();
        } catch (const ValidationError& e) {
            throw ValidationError("budget trace line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rows.empty() && row.time_s <= rows.back().time_s) {
            throw ValidationError("budget trace line " + std::to_string(lineno) + ": times must increase");
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw FormatError("budget trace has no rows");
    return rows;
}

std::vector<BudgetSnapshot> load_budget_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open budget trace " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_budget_trace(ss.str());
}

double default_budget_per_frame(double supply_fraction, double full_config_energy) {
    return supply_fraction * full_config_energy;
}

namespace {

constexpr double kTimeSlack = 1e-9;
constexpr double kMinEpsilonForLatency = 1e-3;

const BudgetSnapshot& snapshot_at(const std::vector<BudgetSnapshot>& trace, double time_s) {
    const BudgetSnapshot* current = &trace.front();
    for (const auto& row : trace) {
        if (row.time_s <= time_s + kTimeSlack) current = &row;
    }
    return *current;
}

const ObjectivePoint& candidate_for(const ControllerState& state, const ReuseConfig& config) {
    for (const auto& c : state.candidates) {
        if (c.config == config) return c;
    }
    throw ValidationError("config " + to_string(config) + " was not evaluated");
}

}  // namespace

SimulationReport run_simulation(const FrameSequence& seq, const std::vector<BudgetSnapshot>& trace,
                                const NetworkSpec& spec, const PlatformPreset& platform,
                                const SimulationOptions& options) {
    if (seq.empty()) throw ValidationError("simulation needs at least one frame");
    if (trace.empty()) throw ValidationError("simulation needs a non-empty budget trace");
    seq.validate();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        trace[i].validate();
        if (i > 0 && trace[i].time_s <= trace[i - 1].time_s) throw ValidationError("budget trace times must increase");
    }
    const double fps = seq.frame_rate.value_or(options.frame_rate);
    const double period = options.check_period_s;
    if (!(fps > 0.0) || !(period > 0.0)) throw ValidationError("frame rate and check period must be positive");
    if (!(platform.peak_mac_rate_per_ms > 0.0)) throw ValidationError("platform peak MAC rate must be positive");
    if (trace.front().time_s > kTimeSlack) throw ValidationError("budget trace must start at time 0");
    const double last_time = static_cast<double>(seq.size() - 1) / fps;
    const double last_check = std::floor(last_time / period + kTimeSlack) * period;
    if (trace.back().time_s + kTimeSlack < last_check) {
        throw ValidationError("budget trace ends at " + std::to_string(trace.back().time_s) +
                              " s but the video needs a check at " + std::to_string(last_check) + " s");
    }

    const std::size_t height = seq[0].height();
    const std::size_t width = seq[0].width();

    FrameSequence sample;
    sample.frames.assign(seq.frames.begin(),
                         seq.frames.begin() + static_cast<long>(std::min(seq.size(), options.sample_frames)));
    const auto configs = enumerate_configs();
    auto candidates = evaluate_configs(configs, spec, sample, CacheState{trace.front().epsilon}, platform.units);
    if (options.regressor) {
        const auto features = regressor_features(seq[0], seq[0]);
        apply_predicted_quality(candidates, regressor_predict(*options.regressor, features));
    }

    StateChannel channel;
    channel.publish(std::make_shared<const ControllerState>(
        make_controller_state(std::move(candidates), platform.units, trace.front().epsilon, period)));

    const ReuseConfig full_config{0, 0, 1};
    StreamEnhancer enhancer(spec, channel.current()->active_config);
    StreamEnhancer reference(spec, full_config);

    std::vector<std::vector<LayerCost>> costs_by_divisor(4);
    for (int d = 1; d <= 3; ++d) {
        costs_by_divisor[static_cast<std::size_t>(d)] =
            network_layer_costs(spec, height / static_cast<std::size_t>(d), width / static_cast<std::size_t>(d));
    }

    SimulationReport report;
    report.frame_height = height;
    report.frame_width = width;
    report.total_frames = seq.size();

    long current_period = -1;
    double quality_sum = 0.0;
    double latency_sum = 0.0;
    auto close_interval = [&]() {
        if (report.intervals.empty()) return;
        IntervalRecord& rec = report.intervals.back();
        rec.interval_energy = total_energy(spec, rec.active_config, rec.frames, CacheState{rec.epsilon},
                                           platform.units, height, width);
        rec.measured_quality = rec.frames ? quality_sum / static_cast<double>(rec.frames) : 0.0;
        rec.mean_latency_ms = rec.frames ? latency_sum / static_cast<double>(rec.frames) : 0.0;
    };

    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double t = static_cast<double>(i) / fps;
        const auto period_index = static_cast<long>(std::floor(t / period + kTimeSlack));
        if (period_index != current_period) {
            close_interval();
            current_period = period_index;
            const double boundary = static_cast<double>(period_index) * period;
            const BudgetSnapshot snap = snapshot_at(trace, boundary);
            const auto state = channel.current();
            const double demand = candidate_for(*state, state->active_config).energy_at(snap.epsilon, state->units);
            const double full_energy = candidate_for(*state, full_config).energy_at(snap.epsilon, state->units);
            const double budget = options.budget_per_frame(snap.supply_fraction, full_energy);
            auto next = std::make_shared<const ControllerState>(control_step(*state, snap, demand, budget));
            const bool adapted = next->active_config != state->active_config;
            channel.publish(next);

            // The scheduler picks up the published state at this frame boundary.
            const auto published = channel.current();
            if (adapted) {
                enhancer.set_config(published->active_config);
                ++report.adaptations;
            } else {
                enhancer.restart_period();
            }
            IntervalRecord rec;
            rec.time_s = boundary;
            rec.supply_fraction = snap.supply_fraction;
            rec.epsilon = snap.epsilon;
            rec.active_config = published->active_config;
            rec.adapted = adapted;
            rec.predicted_energy_per_frame =
                candidate_for(*published, published->active_config).energy_at(snap.epsilon, published->units);
            report.intervals.push_back(rec);
            quality_sum = 0.0;
            latency_sum = 0.0;
        }

        IntervalRecord& rec = report.intervals.back();
        const auto step = enhancer.process(seq[i]);
        const auto ref = reference.process(seq[i]);
        quality_sum += std::min(psnr(step.output, ref.output) / kQualityPsnrScale, 1.0);

        const auto& costs = costs_by_divisor[static_cast<std::size_t>(step.plan.resolution_divisor)];
        double macs = 0.0;
        for (std::size_t l = costs.size() - step.layers_computed; l < costs.size(); ++l) macs += costs[l].macs;
        latency_sum += macs / (std::max(rec.epsilon, kMinEpsilonForLatency) * platform.peak_mac_rate_per_ms);
        ++rec.frames;
    }
    close_interval();
    return report;
}

std::string report_to_json(const SimulationReport& report, int indent) {
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& r : report.intervals) {
        intervals.push_back({{"time_s", r.time_s},
                             {"supply_fraction", r.supply_fraction},
                             {"epsilon", r.epsilon},
                             {"active_config",
                              {{"theta_f", r.active_config.theta_f},
                               {"theta_l", r.active_config.theta_l},
                               {"theta_d", theta_d_string(r.active_config.theta_d_divisor)}}},
                             {"adapted", r.adapted},
                             {"predicted_energy_per_frame", r.predicted_energy_per_frame},
                             {"frames", r.frames},
                             {"interval_energy", r.interval_energy},
                             {"measured_quality_Q", r.measured_quality},
                             {"mean_latency_ms", r.mean_latency_ms}});
    }
    nlohmann::json doc{{"frame_height", report.frame_height},
                       {"frame_width", report.frame_width},
                       {"intervals", std::move(intervals)},
                       {"totals", {{"frames", report.total_frames}, {"adaptations", report.adaptations}}}};
    return doc.dump(indent);
}

std::string report_to_csv(const SimulationReport& report) {
    std::ostringstream out;
    out << "time_s,supply_fraction,epsilon,theta_f,theta_l,theta_d,adapted,predicted_energy_per_frame,frames,"
           "interval_energy,measured_quality_Q,mean_latency_ms\n";
    char buf[512];
    for (const auto& r : report.intervals) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%d,%d,%s,%d,%.10g,%zu,%.10g,%.10g,%.10g\n", r.time_s,
                      r.supply_fraction, r.epsilon, r.active_config.theta_f, r.active_config.theta_l,
                      theta_d_string(r.active_config.theta_d_divisor).c_str(), r.adapted ? 1 : 0,
                      r.predicted_energy_per_frame, r.frames, r.interval_energy, r.measured_quality,
                      r.mean_latency_ms);
        out << buf;
    }
    return out.str();
}

}  // namespace lumen
