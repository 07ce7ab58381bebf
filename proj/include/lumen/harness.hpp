#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lumen/controller.hpp"
#include "lumen/energy.hpp"
#include "lumen/frame.hpp"
#include "lumen/net.hpp"

namespace lumen {

/// CSV with header `time_s,supply_fraction,epsilon`, rows sorted by time.
std::vector<BudgetSnapshot> parse_budget_trace(std::string_view csv_text);
std::vector<BudgetSnapshot> load_budget_trace(const std::filesystem::path& path);

/// Per-frame energy budget given the supply fraction and the per-frame
/// energy of the (0, 0, 1) config.
using BudgetFunction = std::function<double(double supply_fraction, double full_config_energy)>;

/// supply_fraction * full_config_energy
double default_budget_per_frame(double supply_fraction, double full_config_energy);

struct SimulationOptions {
    double frame_rate = 30.0;          ///< used when the sequence carries none
    double check_period_s = 1.0;
    std::size_t sample_frames = 16;    ///< leading frames used to evaluate configs
    BudgetFunction budget_per_frame = default_budget_per_frame;
    std::optional<RegressorSpec> regressor;
};

struct IntervalRecord {
    double time_s = 0.0;
    double supply_fraction = 0.0;
    double epsilon = 0.0;
    ReuseConfig active_config;
    bool adapted = false;
    double predicted_energy_per_frame = 0.0;
    std::size_t frames = 0;
    /// Energy of this interval's frames under the active config.
    double interval_energy = 0.0;
    double measured_quality = 0.0;
    /// Modelled as executed MACs / (epsilon * peak MAC rate).
    double mean_latency_ms = 0.0;
};

struct SimulationReport {
    std::size_t frame_height = 0;
    std::size_t frame_width = 0;
    std::vector<IntervalRecord> intervals;
    std::size_t total_frames = 0;
    std::size_t adaptations = 0;
};

/// Plays `trace` against `seq`: the controller checks the budget at every
/// check-period boundary, and frames are enhanced under the config it
/// publishes. Each interval starts a new keyframe period. Deterministic.
SimulationReport run_simulation(const FrameSequence& seq, const std::vector<BudgetSnapshot>& trace,
                                const NetworkSpec& spec, const PlatformPreset& platform,
                                const SimulationOptions& options = {});

std::string report_to_json(const SimulationReport& report, int indent = 2);
std::string report_to_csv(const SimulationReport& report);

}  // namespace lumen
