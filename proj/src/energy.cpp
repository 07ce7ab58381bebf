#include "lumen/energy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lumen/error.hpp"

namespace lumen {

std::string_view to_string(Platform platform) { return platform == Platform::Gpu ? "gpu" : "cpu"; }

void EnergyUnitCosts::validate() const {
    if (delta_c < 0 || delta_cache < 0 || delta_dram < 0 || delta_sm < 0) {
        throw ValidationError("unit energy costs must be non-negative");
    }
    if (platform == Platform::Cpu && delta_sm != 0.0) {
        throw ValidationError("cpu platforms have no shared memory: delta_sm must be 0");
    }
}

std::uint64_t mac_count(const LayerSpec& layer, std::size_t height, std::size_t width) {
    if (layer.kind != LayerKind::Conv) return 0;
    const auto k = static_cast<std::uint64_t>(layer.kernel);
    const auto cin = static_cast<std::uint64_t>(layer.in_channels / layer.groups);
    return k * k * cin * static_cast<std::uint64_t>(layer.out_channels) * height * width;
}

std::uint64_t mem_access_count(const LayerSpec& layer, std::size_t height, std::size_t width) {
    const std::uint64_t hw = static_cast<std::uint64_t>(height) * width;
    if (layer.kind != LayerKind::Conv) return 2 * static_cast<std::uint64_t>(layer.out_channels) * hw;
    const auto k = static_cast<std::uint64_t>(layer.kernel);
    const auto cin = static_cast<std::uint64_t>(layer.in_channels / layer.groups);
    const auto cout = static_cast<std::uint64_t>(layer.out_channels);
    return 2 * cout * cin * hw * k * k + cout * hw;
}

double layer_energy(const LayerCost& cost, const CacheState& cache, const EnergyUnitCosts& units) {
    return units.delta_c * cost.macs + cache.epsilon * units.delta_cache * cost.mem_accesses +
           (1.0 - cache.epsilon) * units.delta_dram * cost.mem_accesses + cost.mem_accesses * units.delta_sm;
}

std::vector<LayerCost> network_layer_costs(const NetworkSpec& spec, std::size_t height, std::size_t width) {
    std::vector<std::size_t> heights{height};
    std::vector<std::size_t> widths{width};
    std::vector<LayerCost> costs;
    costs.reserve(spec.layers.size());
    for (const auto& layer : spec.layers) {
        const auto src = static_cast<std::size_t>(layer.dense_inputs.empty() ? heights.size() - 1
                                                                               : layer.dense_inputs.front());
        const std::size_t oh = layer.kind == LayerKind::Conv ? layer.output_height(heights[src]) : heights[src];
        const std::size_t ow = layer.kind == LayerKind::Conv ? layer.output_width(widths[src]) : widths[src];
        heights.push_back(oh);
        widths.push_back(ow);
        costs.push_back({static_cast<double>(mac_count(layer, oh, ow)),
                         static_cast<double>(mem_access_count(layer, oh, ow))});
    }
    return costs;
}

std::vector<bool> layer_mask(const FramePlan& plan, std::size_t layer_count, std::size_t reused_prefix) {
    std::vector<bool> mask(layer_count, true);
    if (plan.action == FrameAction::ReuseMap) {
        std::fill(mask.begin(), mask.end(), false);
    } else if (plan.action == FrameAction::PartialCompute) {
        std::fill(mask.begin(), mask.begin() + static_cast<long>(std::min(reused_prefix, layer_count)), false);
    }
    return mask;
}

LayerCost executed_cost(std::span<const LayerCost> layer_costs, std::span<const FramePlan> plans,
                        std::size_t reused_prefix, double theta_d) {
    LayerCost total;
    for (const auto& plan : plans) {
        const auto mask = layer_mask(plan, layer_costs.size(), reused_prefix);
        for (std::size_t l = 0; l < layer_costs.size(); ++l) {
            if (!mask[l]) continue;
            total.macs += layer_costs[l].macs * theta_d;
            total.mem_accesses += layer_costs[l].mem_accesses * theta_d;
        }
    }
    return total;
}

double total_energy(std::span<const double> layer_energies, std::span<const FramePlan> plans,
                    std::size_t reused_prefix, double theta_d) {
    double total = 0.0;
    for (const auto& plan : plans) {
        const auto mask = layer_mask(plan, layer_energies.size(), reused_prefix);
        for (std::size_t l = 0; l < layer_energies.size(); ++l) {
            if (mask[l]) total += layer_energies[l] * theta_d;
        }
    }
    return total;
}

double total_energy(const NetworkSpec& spec, const ReuseConfig& config, std::size_t n_frames,
                    const CacheState& cache, const EnergyUnitCosts& units, std::size_t height, std::size_t width) {
    config.validate();
    if (static_cast<std::size_t>(config.theta_l) >= std::max<std::size_t>(spec.conv_layer_count(), 1)) {
        throw ValidationError("config " + to_string(config) + " reuses more layers than the network has");
    }
    const std::size_t prefix = reused_prefix_length(spec, config.theta_l);
    const auto costs = network_layer_costs(spec, height, width);
    std::vector<double> energies;
    energies.reserve(costs.size());
    for (const auto& c : costs) energies.push_back(layer_energy(c, cache, units));
    const auto plans = expand_config(config, n_frames);
    return total_energy(energies, plans, prefix, config.theta_d());
}

CacheState estimate_cache_hit_rate(double measured_mac_rate, double peak_mac_rate) {
    if (!(peak_mac_rate > 0.0)) throw ValidationError("peak MAC rate must be positive");
    if (measured_mac_rate < 0.0) throw ValidationError("measured MAC rate must be non-negative");
    return {std::clamp(measured_mac_rate / peak_mac_rate, 0.0, 1.0), CacheSource::Measured};
}

PlatformPreset parse_platform_preset(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("platform preset is not valid JSON: ") + e.what());
    }
    PlatformPreset preset;
    try {
        const auto platform = doc.at("platform").get<std::string>();
        if (platform == "cpu") {
            preset.units.platform = Platform::Cpu;
        } else if (platform == "gpu") {
            preset.units.platform = Platform::Gpu;
        } else {
            throw FormatError("platform must be \"cpu\" or \"gpu\"");
        }
        const auto costs = doc.at("unit_costs").get<std::vector<double>>();
        if (costs.size() != 4) throw FormatError("unit_costs must hold 4 values");
        preset.units.delta_c = costs[0];
        preset.units.delta_cache = costs[1];
        preset.units.delta_dram = costs[2];
        preset.units.delta_sm = costs[3];
        preset.peak_mac_rate_per_ms = doc.at("peak_mac_rate_per_ms").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed platform preset: ") + e.what());
    }
    preset.units.validate();
    if (!(preset.peak_mac_rate_per_ms > 0.0)) throw ValidationError("peak_mac_rate_per_ms must be positive");
    return preset;
}

PlatformPreset load_platform_preset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open platform preset " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_platform_preset(ss.str());
}

std::vector<CacheTraceRow> load_cache_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cache trace " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty cache trace");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,epsilon") throw FormatError("cache trace header must be 'time_s,epsilon'");
    std::vector<CacheTraceRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        CacheTraceRow row;
        char comma = 0;
        if (!(ss >> row.time_s >> comma >> row.epsilon) || comma != ',' || !(ss >> std::ws).eof()) {
            throw FormatError("cache trace line " + std::to_string(lineno) + " is malformed");
        }
        if (row.epsilon < 0.0 || row.epsilon > 1.0) {
            throw ValidationError("cache trace line " + std::to_string(lineno) + ": epsilon outside [0, 1]");
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace lumen
