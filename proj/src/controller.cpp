#include "lumen/controller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lumen/error.hpp"
#include "lumen/metrics.hpp"
#include "lumen/parallel.hpp"
#include "lumen/resample.hpp"
#include "lumen/scheduler.hpp"

namespace lumen {

using nlohmann::json;

std::vector<ReuseConfig> enumerate_configs() {
    std::vector<ReuseConfig> configs;
    configs.reserve(132);
    for (int f = 0; f <= ReuseConfig::kMaxFrameReuse; ++f) {
        for (int l = 0; l <= ReuseConfig::kMaxLayerReuse; ++l) {
            for (int d = 1; d <= 3; ++d) configs.push_back({f, l, d});
        }
    }
    return configs;
}

std::size_t config_index(const ReuseConfig& config) {
    config.validate();
    return static_cast<std::size_t>((config.theta_f * (ReuseConfig::kMaxLayerReuse + 1) + config.theta_l) * 3 +
                                    (config.theta_d_divisor - 1));
}

std::size_t min_sample_frames(const ReuseConfig& config) { return static_cast<std::size_t>(config.theta_f) + 2; }

namespace {

struct EvaluationContext {
    const NetworkSpec& spec;
    const FrameSequence& sample;
    const CacheState& cache;
    const EnergyUnitCosts& units;
    std::vector<Frame> reference;
    std::vector<LayerCost> layer_costs;
};

EvaluationContext make_context(const NetworkSpec& spec, const FrameSequence& sample, const CacheState& cache,
                               const EnergyUnitCosts& units) {
    if (sample.empty()) throw ValidationError("evaluation sample is empty");
    sample.validate();
    EvaluationContext ctx{spec, sample, cache, units, {}, {}};
    ctx.reference = enhance_sequence(sample, spec, ReuseConfig{0, 0, 1}).output.frames;
    ctx.layer_costs = network_layer_costs(spec, sample[0].height(), sample[0].width());
    return ctx;
}

ObjectivePoint evaluate_with(const EvaluationContext& ctx, const ReuseConfig& config) {
    const std::size_t n = ctx.sample.size();
    if (n < min_sample_frames(config)) {
        throw ValidationError("config " + to_string(config) + " needs at least " +
                              std::to_string(min_sample_frames(config)) + " sample frames, got " + std::to_string(n));
    }
    const auto out = enhance_sequence(ctx.sample, ctx.spec, config).output;
    double quality = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        quality += std::min(psnr(out[t], ctx.reference[t]) / kQualityPsnrScale, 1.0);
    }
    ObjectivePoint p;
    p.config = config;
    p.quality = quality / static_cast<double>(n);
    const auto plans = expand_config(config, n);
    const auto cost = executed_cost(ctx.layer_costs, plans, reused_prefix_length(ctx.spec, config.theta_l),
                                    config.theta_d());
    p.macs_per_frame = cost.macs / static_cast<double>(n);
    p.mem_per_frame = cost.mem_accesses / static_cast<double>(n);
    p.energy = p.energy_at(ctx.cache.epsilon, ctx.units);
    return p;
}

}  // namespace

ObjectivePoint evaluate_config(const ReuseConfig& config, const NetworkSpec& spec, const FrameSequence& sample,
                               const CacheState& cache, const EnergyUnitCosts& units) {
    config.validate();
    if (sample.size() < min_sample_frames(config)) {
        throw ValidationError("config " + to_string(config) + " needs at least " +
                              std::to_string(min_sample_frames(config)) + " sample frames");
    }
    return evaluate_with(make_context(spec, sample, cache, units), config);
}

std::vector<ObjectivePoint> evaluate_configs(std::span<const ReuseConfig> configs, const NetworkSpec& spec,
                                             const FrameSequence& sample, const CacheState& cache,
                                             const EnergyUnitCosts& units) {
    const auto ctx = make_context(spec, sample, cache, units);
    std::vector<ReuseConfig> usable;
    for (const auto& c : configs) {
        c.validate();
        if (sample.size() >= min_sample_frames(c) &&
            static_cast<std::size_t>(c.theta_l) < std::max<std::size_t>(spec.conv_layer_count(), 1)) {
            usable.push_back(c);
        }
    }
    std::vector<ObjectivePoint> points(usable.size());
    parallel_for(usable.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) points[i] = evaluate_with(ctx, usable[i]);
    });
    return points;
}

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    return a.quality >= b.quality && a.energy <= b.energy && (a.quality > b.quality || a.energy < b.energy);
}

std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points) {
    if (points.empty()) throw ValidationError("pareto_front needs at least one point");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].energy != points[b].energy) return points[a].energy < points[b].energy;
        return points[a].quality > points[b].quality;
    });
    // Sweeping by increasing energy, a point survives only if it beats the
    // best quality seen so far.
    std::vector<ObjectivePoint> front;
    for (std::size_t idx : order) {
        if (front.empty() || points[idx].quality > front.back().quality) front.push_back(points[idx]);
    }
    return front;
}

double select_lambda(double supply_fraction) {
    if (!(supply_fraction >= 0.0 && supply_fraction <= 1.0)) {
        throw ValidationError("supply fraction must be in [0, 1]");
    }
    return std::clamp(1.0 - supply_fraction, 0.05, 0.95);
}

const ObjectivePoint& select_point(std::span<const ObjectivePoint> frontier, double lambda) {
    if (frontier.empty()) throw ValidationError("cannot select from an empty frontier");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must be in [0, 1]");
    const auto [lo, hi] = std::minmax_element(frontier.begin(), frontier.end(),
                                              [](const auto& a, const auto& b) { return a.energy < b.energy; });
    const double e_min = lo->energy;
    const double range = hi->energy - e_min;
    auto score = [&](const ObjectivePoint& p) {
        const double e_hat = range > 0.0 ? (p.energy - e_min) / range : 0.0;
        return lambda * e_hat + (1.0 - lambda) * (1.0 - p.quality);
    };
    constexpr double kTie = 1e-12;
    const ObjectivePoint* best = &frontier.front();
    double best_score = score(*best);
    for (const auto& p : frontier.subspan(1)) {
        const double s = score(p);
        bool better = s < best_score - kTie;
        if (!better && std::abs(s - best_score) <= kTie) {
            better = p.energy < best->energy ||
                     (p.energy == best->energy && config_index(p.config) < config_index(best->config));
        }
        if (better) {
            best = &p;
            best_score = s;
        }
    }
    return *best;
}

ReuseConfig select_config(std::span<const ObjectivePoint> frontier, double lambda) {
    return select_point(frontier, lambda).config;
}

// ---------------------------------------------------------------------------
// Regressor

void RegressorSpec::validate() const {
    auto check = [](const DenseLayer& l, const char* name) {
        if (l.inputs == 0 || l.outputs == 0) throw ValidationError(std::string(name) + " layer has no units");
        if (l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs) {
            throw ValidationError(std::string(name) + " layer weight/bias sizes do not match its dims");
        }
    };
    check(hidden, "hidden");
    check(output, "output");
    if (hidden.inputs != kFeatureCount) {
        throw ValidationError("regressor expects " + std::to_string(kFeatureCount) + " input features, got " +
                              std::to_string(hidden.inputs));
    }
    if (output.inputs != hidden.outputs) throw ValidationError("regressor layer dims do not chain");
    if (output.outputs != 2 * enumerate_configs().size()) {
        throw ValidationError("regressor must output (Q, E) for each of the 132 configs");
    }
}

RegressorSpec parse_regressor(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("regressor file is not valid JSON: ") + e.what());
    }
    RegressorSpec reg;
    try {
        if (doc.at("version").get<int>() != 1) throw FormatError("unsupported regressor version");
        const auto& layers = doc.at("layers");
        if (!layers.is_array() || layers.size() != 2) throw FormatError("regressor needs exactly 2 layers");
        auto read = [](const json& item) {
            if (item.value("kind", std::string("fc")) != "fc") throw FormatError("regressor layers must be fc");
            DenseLayer l;
            l.inputs = item.at("in").get<std::size_t>();
            l.outputs = item.at("out").get<std::size_t>();
            l.weights = item.at("weights").get<std::vector<double>>();
            l.bias = item.at("bias").get<std::vector<double>>();
            if (l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs) {
                throw FormatError("regressor weight array length does not match in x out");
            }
            return l;
        };
        reg.hidden = read(layers[0]);
        reg.output = read(layers[1]);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed regressor file: ") + e.what());
    }
    reg.validate();
    return reg;
}

RegressorSpec load_regressor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open regressor file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_regressor(ss.str());
}

std::string serialize_regressor(const RegressorSpec& reg) {
    auto layer = [](const DenseLayer& l) {
        return json{{"kind", "fc"}, {"in", l.inputs}, {"out", l.outputs}, {"weights", l.weights}, {"bias", l.bias}};
    };
    json doc{{"version", 1},
             {"input_dim", RegressorSpec::kFeatureCount},
             {"layers", json::array({layer(reg.hidden), layer(reg.output)})}};
    return doc.dump(1);
}

std::vector<double> regressor_features(const Frame& current, const Frame& keyframe) {
    constexpr std::size_t side = RegressorSpec::kFeatureSide;
    std::vector<double> features;
    features.reserve(RegressorSpec::kFeatureCount);
    for (const Frame* f : {&current, &keyframe}) {
        const Plane small = resample(luminance(*f), side, side);
        features.insert(features.end(), small.values.begin(), small.values.end());
    }
    return features;
}

std::vector<ObjectivePoint> regressor_predict(const RegressorSpec& reg, std::span<const double> features) {
    if (features.size() != reg.hidden.inputs) {
        throw DimensionError("regressor expects " + std::to_string(reg.hidden.inputs) + " features, got " +
                             std::to_string(features.size()));
    }
    auto dense = [](const DenseLayer& l, std::span<const double> in) {
        std::vector<double> out(l.outputs);
        for (std::size_t o = 0; o < l.outputs; ++o) {
            double s = l.bias[o];
            const double* w = l.weights.data() + o * l.inputs;
            for (std::size_t i = 0; i < l.inputs; ++i) s += w[i] * in[i];
            out[o] = s;
        }
        return out;
    };
    auto hidden = dense(reg.hidden, features);
    for (double& v : hidden) v = std::max(v, 0.0);
    const auto raw = dense(reg.output, hidden);
    const auto configs = enumerate_configs();
    std::vector<ObjectivePoint> points(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        points[i].config = configs[i];
        points[i].quality = std::clamp(raw[2 * i], 0.0, 1.0);
        points[i].energy = std::max(raw[2 * i + 1], 0.0);
    }
    return points;
}

void apply_predicted_quality(std::vector<ObjectivePoint>& candidates, std::span<const ObjectivePoint> predictions) {
    for (auto& c : candidates) {
        const auto it = std::find_if(predictions.begin(), predictions.end(),
                                     [&](const ObjectivePoint& p) { return p.config == c.config; });
        if (it == predictions.end()) throw ValidationError("no prediction for config " + to_string(c.config));
        c.quality = it->quality;
    }
}

// ---------------------------------------------------------------------------
// Control loop

void BudgetSnapshot::validate() const {
    if (!(supply_fraction >= 0.0 && supply_fraction <= 1.0)) throw ValidationError("supply fraction outside [0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("cache-hit-rate outside [0, 1]");
}

double ControllerState::predicted_energy(const ReuseConfig& config) const {
    for (const auto& c : candidates) {
        if (c.config == config) return c.energy_at(epsilon, units);
    }
    throw ValidationError("config " + to_string(config) + " was not evaluated");
}

ControllerState make_controller_state(std::vector<ObjectivePoint> candidates, const EnergyUnitCosts& units,
                                      double epsilon, double check_period_s) {
    if (candidates.empty()) throw ValidationError("controller needs evaluated candidates");
    if (!(check_period_s > 0.0)) throw ValidationError("check period must be positive");
    ControllerState state;
    state.units = units;
    state.epsilon = epsilon;
    state.check_period_s = check_period_s;
    for (auto& c : candidates) c.energy = c.energy_at(epsilon, units);
    state.candidates = std::move(candidates);
    state.pareto = pareto_front(state.candidates);
    state.lambda = select_lambda(1.0);
    state.active_config = ReuseConfig{0, 0, 1};
    return state;
}

ControllerState control_step(const ControllerState& state, const BudgetSnapshot& snapshot, double predicted_demand,
                             double supply_budget) {
    snapshot.validate();
    if (predicted_demand <= supply_budget) return state;
    ControllerState next = state;
    next.epsilon = snapshot.epsilon;
    for (auto& c : next.candidates) c.energy = c.energy_at(snapshot.epsilon, next.units);
    next.pareto = pareto_front(next.candidates);
    next.lambda = select_lambda(snapshot.supply_fraction);
    next.active_config = select_config(next.pareto, next.lambda);
    return next;
}

void StateChannel::publish(std::shared_ptr<const ControllerState> state) {
    std::lock_guard lock(mutex_);
    state_ = std::move(state);
}

std::shared_ptr<const ControllerState> StateChannel::current() const {
    std::lock_guard lock(mutex_);
    return state_;
}

std::string points_to_json(std::span<const ObjectivePoint> points, int indent) {
    json arr = json::array();
    for (const auto& p : points) {
        arr.push_back({{"config",
                        {{"theta_f", p.config.theta_f},
                         {"theta_l", p.config.theta_l},
                         {"theta_d", theta_d_string(p.config.theta_d_divisor)}}},
                       {"Q", p.quality},
                       {"E", p.energy}});
    }
    return arr.dump(indent);
}

}  // namespace lumen
