#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lumen/energy.hpp"
#include "lumen/frame.hpp"
#include "lumen/net.hpp"
#include "lumen/reuse.hpp"

namespace lumen {

/// A candidate configuration with its normalised quality and predicted
/// per-frame energy. macs_per_frame / mem_per_frame are the executed counts
/// behind `energy`, kept so energy can be re-priced for a new cache-hit-rate.
struct ObjectivePoint {
    ReuseConfig config;
    double quality = 0.0;
    double energy = 0.0;
    double macs_per_frame = 0.0;
    double mem_per_frame = 0.0;

    double energy_at(double epsilon, const EnergyUnitCosts& units) const {
        return units.delta_c * macs_per_frame + units.memory_access_cost(epsilon) * mem_per_frame;
    }

    friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

/// All 11 x 4 x 3 configs, theta_f outermost, then theta_l, then theta_d
/// (1, 1/2, 1/3).
std::vector<ReuseConfig> enumerate_configs();
/// Position of `config` in enumerate_configs().
std::size_t config_index(const ReuseConfig& config);

inline constexpr double kQualityPsnrScale = 50.0;

/// Frames needed to evaluate `config`: theta_f + 2.
std::size_t min_sample_frames(const ReuseConfig& config);

/// Exhaustive quality oracle plus config energy for a single config. Quality
/// is min(psnr(out, reference) / 50, 1) averaged over the sample, where the
/// reference is the (0, 0, 1) output.
ObjectivePoint evaluate_config(const ReuseConfig& config, const NetworkSpec& spec,
                               const FrameSequence& sample, const CacheState& cache,
                               const EnergyUnitCosts& units);

/// Evaluates every config the sample is long enough for, sharing the
/// reference outputs. Order follows `configs`.
std::vector<ObjectivePoint> evaluate_configs(std::span<const ReuseConfig> configs,
                                             const NetworkSpec& spec, const FrameSequence& sample,
                                             const CacheState& cache, const EnergyUnitCosts& units);

/// True when `a` has quality >= and energy <= `b`, one of them strict.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

/// Nondominated points, energy ascending. Exact duplicates appear once.
std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points);

/// lambda = clamp(1 - supply_fraction, 0.05, 0.95)
double select_lambda(double supply_fraction);

/// Minimises lambda * E_hat + (1 - lambda) * (1 - Q) with E min-max
/// normalised over the frontier; ties go to lower energy, then enumeration
/// order.
const ObjectivePoint& select_point(std::span<const ObjectivePoint> frontier, double lambda);
ReuseConfig select_config(std::span<const ObjectivePoint> frontier, double lambda);

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> bias;
};

/// Two fully connected layers (FC -> ReLU -> FC) mapping frame features to
/// (Q, E) for each enumerated config.
struct RegressorSpec {
    static constexpr std::size_t kFeatureSide = 16;
    static constexpr std::size_t kFeatureCount = 2 * kFeatureSide * kFeatureSide;

    DenseLayer hidden;
    DenseLayer output;

    void validate() const;
};

RegressorSpec parse_regressor(std::string_view json_text);
RegressorSpec load_regressor(const std::filesystem::path& path);
std::string serialize_regressor(const RegressorSpec& reg);

/// 16x16 luminance of the current frame followed by that of the previous
/// keyframe.
std::vector<double> regressor_features(const Frame& current, const Frame& keyframe);

/// One point per enumerated config, with Q clamped to [0, 1] and E >= 0.
std::vector<ObjectivePoint> regressor_predict(const RegressorSpec& reg,
                                              std::span<const double> features);

/// Replaces the quality of each candidate by the regressor's prediction for
/// the same config. Energies stay analytic.
void apply_predicted_quality(std::vector<ObjectivePoint>& candidates,
                             std::span<const ObjectivePoint> predictions);

struct BudgetSnapshot {
    double time_s = 0.0;
    double supply_fraction = 1.0;
    double epsilon = 1.0;

    void validate() const;
};

struct ControllerState {
    std::vector<ObjectivePoint> candidates;  // every evaluated config
    std::vector<ObjectivePoint> pareto;
    double lambda = 0.05;
    ReuseConfig active_config;
    double check_period_s = 1.0;
    double epsilon = 1.0;
    EnergyUnitCosts units;

    /// Per-frame energy of `config` at the state's epsilon.
    double predicted_energy(const ReuseConfig& config) const;

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Prices `candidates` at `epsilon`, builds the frontier and starts at
/// (0, 0, 1).
ControllerState make_controller_state(std::vector<ObjectivePoint> candidates,
                                      const EnergyUnitCosts& units, double epsilon,
                                      double check_period_s = 1.0);

/// One analyzer/optimizer pass. Leaves the state alone while the demand fits
/// the budget; otherwise re-prices the candidates at the snapshot's epsilon,
/// rebuilds the frontier and re-selects the config.
ControllerState control_step(const ControllerState& state, const BudgetSnapshot& snapshot,
                             double predicted_demand, double supply_budget);

/// Single-writer, many-reader hand-off of immutable controller states.
class StateChannel {
public:
    void publish(std::shared_ptr<const ControllerState> state);
    std::shared_ptr<const ControllerState> current() const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ControllerState> state_;
};

std::string points_to_json(std::span<const ObjectivePoint> points, int indent = 2);

}  // namespace lumen
