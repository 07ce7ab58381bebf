#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lumen/net.hpp"
#include "lumen/reuse.hpp"

namespace lumen {

enum class Platform { Cpu, Gpu };

std::string_view to_string(Platform platform);

/// Energy per MAC / cache access / DRAM access / shared-memory access, in
/// units normalised to one MAC.
struct EnergyUnitCosts {
    double delta_c = 1.0;
    double delta_cache = 6.0;
    double delta_dram = 200.0;
    double delta_sm = 0.0;
    Platform platform = Platform::Cpu;

    static EnergyUnitCosts cpu() { return {1.0, 6.0, 200.0, 0.0, Platform::Cpu}; }
    static EnergyUnitCosts gpu() { return {1.0, 6.0, 200.0, 2.0, Platform::Gpu}; }

    void validate() const;

    /// Energy of one memory access at cache-hit-rate epsilon.
    double memory_access_cost(double epsilon) const {
        return epsilon * delta_cache + (1.0 - epsilon) * delta_dram + delta_sm;
    }

    friend bool operator==(const EnergyUnitCosts&, const EnergyUnitCosts&) = default;
};

struct LayerCost {
    double macs = 0.0;
    double mem_accesses = 0.0;
};

enum class CacheSource { Trace, Measured };

struct CacheState {
    double epsilon = 1.0;
    CacheSource source = CacheSource::Trace;
};

/// Conv: K^2 (Cin / groups) Cout H W, activation: 0. `height`/`width` are
/// the layer's output dims.
std::uint64_t mac_count(const LayerSpec& layer, std::size_t height, std::size_t width);

/// Conv: 2 Cout (Cin / groups) H W K^2 + Cout H W, activation: 2 C H W.
std::uint64_t mem_access_count(const LayerSpec& layer, std::size_t height, std::size_t width);

/// E_l = dC C_l + eps dcache M_l + (1 - eps) dDRAM M_l + dSM M_l
double layer_energy(const LayerCost& cost, const CacheState& cache, const EnergyUnitCosts& units);

/// Costs of every layer entry for an input of height x width.
std::vector<LayerCost> network_layer_costs(const NetworkSpec& spec, std::size_t height,
                                           std::size_t width);

/// Per-layer execution mask of one planned frame.
std::vector<bool> layer_mask(const FramePlan& plan, std::size_t layer_count,
                             std::size_t reused_prefix);

/// Mask- and theta_d-weighted MAC and memory-access totals over a plan.
/// total_energy is linear in these for fixed unit costs.
LayerCost executed_cost(std::span<const LayerCost> layer_costs, std::span<const FramePlan> plans,
                        std::size_t reused_prefix, double theta_d);

/// sum_f sum_l mask_f mask_l E_l theta_d over precomputed layer energies.
double total_energy(std::span<const double> layer_energies, std::span<const FramePlan> plans,
                    std::size_t reused_prefix, double theta_d);

/// Predicted energy of `n_frames` frames under `config`, with layer counts
/// taken at height x width and scaled by theta_d.
double total_energy(const NetworkSpec& spec, const ReuseConfig& config, std::size_t n_frames,
                    const CacheState& cache, const EnergyUnitCosts& units, std::size_t height,
                    std::size_t width);

/// epsilon = clamp(measured / peak, 0, 1). Throws ValidationError if peak <= 0.
CacheState estimate_cache_hit_rate(double measured_mac_rate, double peak_mac_rate);

/// Offline platform profile.
struct PlatformPreset {
    EnergyUnitCosts units;
    double peak_mac_rate_per_ms = 0.0;
};

PlatformPreset parse_platform_preset(std::string_view json_text);
PlatformPreset load_platform_preset(const std::filesystem::path& path);

struct CacheTraceRow {
    double time_s = 0.0;
    double epsilon = 1.0;
};

/// CSV with header `time_s,epsilon`.
std::vector<CacheTraceRow> load_cache_trace(const std::filesystem::path& path);

}  // namespace lumen
