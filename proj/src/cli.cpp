#include "lumen/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lumen/controller.hpp"
#include "lumen/energy.hpp"
#include "lumen/error.hpp"
#include "lumen/harness.hpp"
#include "lumen/imageio.hpp"
#include "lumen/metrics.hpp"
#include "lumen/net.hpp"
#include "lumen/parallel.hpp"
#include "lumen/scheduler.hpp"

namespace lumen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Resolution {
    std::size_t height = 0;
    std::size_t width = 0;
};

Resolution parse_resolution(const std::string& text) {
    static const std::regex pattern(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) throw ValidationError("resolution must look like HxW, got '" + text + "'");
    Resolution r{std::stoul(m[1].str()), std::stoul(m[2].str())};
    if (r.height == 0 || r.width == 0) throw ValidationError("resolution must be non-zero");
    return r;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text << '\n';
        return;
    }
    std::ofstream file(out_path);
    if (!file) throw IoError("cannot write " + out_path);
    file << text << '\n';
    if (!file) throw IoError("write failed for " + out_path);
}

json config_json(const ReuseConfig& c) {
    return {{"theta_f", c.theta_f}, {"theta_l", c.theta_l}, {"theta_d", theta_d_string(c.theta_d_divisor)}};
}

struct EnhanceArgs {
    std::string input, output, weights, theta_d = "1";
    int theta_f = 0;
    int theta_l = 0;
};

void run_enhance(const EnhanceArgs& a, std::ostream& out) {
    const ReuseConfig config{a.theta_f, a.theta_l, parse_theta_d(a.theta_d)};
    config.validate();
    const NetworkSpec spec = load_weights(a.weights);
    const auto files = list_frame_files(a.input);
    if (files.empty()) throw IoError("no PNG/PPM frames in " + a.input);
    FrameSequence seq;
    for (const auto& f : files) seq.frames.push_back(load_frame(f));
    const auto result = enhance_sequence(seq, spec, config);
    fs::create_directories(a.output);
    for (std::size_t i = 0; i < files.size(); ++i) {
        save_frame(result.output[i], fs::path(a.output) / files[i].filename());
    }
    const fs::path plan_path = fs::path(a.output) / "plan.json";
    emit(plan_to_json(config, result.plans, result.latency), plan_path.string(), out);
    json summary{{"frames", files.size()},
                 {"output", a.output},
                 {"plan", plan_path.string()},
                 {"config", config_json(config)},
                 {"mean_latency_ms", result.latency.mean_ms()}};
    out << summary.dump(2) << '\n';
}

struct MetricsArgs {
    std::string reference, test, sequence, out;
};

void run_metrics(const MetricsArgs& a, std::ostream& out) {
    MetricReport report;
    if (!a.sequence.empty()) {
        if (!a.reference.empty() || !a.test.empty()) throw ValidationError("use either --sequence or --reference/--test");
        report = sequence_report(load_sequence(a.sequence));
    } else {
        if (a.reference.empty() || a.test.empty()) throw ValidationError("pair mode needs both --reference and --test");
        report = compare_frames(load_frame(a.reference), load_frame(a.test));
    }
    emit(to_json(report), a.out, out);
}

struct ProfileArgs {
    std::string weights, resolution, platform, out, theta_d = "1", cache_trace;
    std::optional<double> epsilon;
    std::optional<double> measured_mac_rate;
    int theta_f = 0;
    int theta_l = 0;
    std::size_t frames = 1;
};

void run_profile(const ProfileArgs& a, std::ostream& out) {
    const NetworkSpec spec = load_weights(a.weights);
    const PlatformPreset preset = load_platform_preset(a.platform);
    const Resolution res = parse_resolution(a.resolution);
    if (a.epsilon && a.measured_mac_rate) throw ValidationError("give either --epsilon or --measured-mac-rate");
    CacheState cache{1.0, CacheSource::Trace};
    if (a.epsilon) {
        if (*a.epsilon < 0.0 || *a.epsilon > 1.0) throw ValidationError("--epsilon must be in [0, 1]");
        cache.epsilon = *a.epsilon;
    } else if (a.measured_mac_rate) {
        cache = estimate_cache_hit_rate(*a.measured_mac_rate, preset.peak_mac_rate_per_ms);
    }
    const auto costs = network_layer_costs(spec, res.height, res.width);
    json layers = json::array();
    double total = 0.0;
    std::uint64_t total_macs = 0;
    std::uint64_t total_mem = 0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        const double e = layer_energy(costs[i], cache, preset.units);
        total += e;
        total_macs += static_cast<std::uint64_t>(costs[i].macs);
        total_mem += static_cast<std::uint64_t>(costs[i].mem_accesses);
        layers.push_back({{"index", i},
                          {"kind", spec.layers[i].kind == LayerKind::Conv ? "conv" : "activation"},
                          {"C_l", static_cast<std::uint64_t>(costs[i].macs)},
                          {"M_l", static_cast<std::uint64_t>(costs[i].mem_accesses)},
                          {"E_l", e}});
    }
    const ReuseConfig config{a.theta_f, a.theta_l, parse_theta_d(a.theta_d)};
    config.validate();
    if (a.frames == 0) throw ValidationError("--frames must be >= 1");
    json doc{{"platform", std::string(to_string(preset.units.platform))},
             {"resolution", {{"height", res.height}, {"width", res.width}}},
             {"epsilon", cache.epsilon},
             {"layers", std::move(layers)},
             {"total", {{"C", total_macs}, {"M", total_mem}, {"E", total}}},
             {"config", config_json(config)},
             {"frames", a.frames},
             {"config_energy", total_energy(spec, config, a.frames, cache, preset.units, res.height, res.width)}};
    if (!a.cache_trace.empty()) {
        json rows = json::array();
        for (const auto& row : load_cache_trace(a.cache_trace)) {
            rows.push_back({{"time_s", row.time_s},
                            {"epsilon", row.epsilon},
                            {"config_energy", total_energy(spec, config, a.frames, CacheState{row.epsilon},
                                                           preset.units, res.height, res.width)}});
        }
        doc["cache_trace"] = std::move(rows);
    }
    emit(doc.dump(2), a.out, out);
}

struct ParetoArgs {
    std::string weights, sample, platform, regressor, out;
    double epsilon = 1.0;
};

void run_pareto(const ParetoArgs& a, std::ostream& out) {
    const NetworkSpec spec = load_weights(a.weights);
    const PlatformPreset preset = load_platform_preset(a.platform);
    if (a.epsilon < 0.0 || a.epsilon > 1.0) throw ValidationError("--epsilon must be in [0, 1]");
    const FrameSequence sample = load_sequence(a.sample);
    const auto configs = enumerate_configs();
    auto points = evaluate_configs(configs, spec, sample, CacheState{a.epsilon}, preset.units);
    if (!a.regressor.empty()) {
        const auto reg = load_regressor(a.regressor);
        const Frame& keyframe = sample[0];
        apply_predicted_quality(points, regressor_predict(reg, regressor_features(sample.frames.back(), keyframe)));
    }
    const auto front = pareto_front(points);
    json doc{{"epsilon", a.epsilon},
             {"quality_source", a.regressor.empty() ? "oracle" : "regressor"},
             {"points", json::parse(points_to_json(points))},
             {"frontier", json::parse(points_to_json(front))}};
    emit(doc.dump(2), a.out, out);
}

struct SimulateArgs {
    std::string input, trace, weights, platform, out, regressor;
    double fps = 30.0;
    double check_period = 1.0;
    std::size_t sample_frames = 16;
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
    const NetworkSpec spec = load_weights(a.weights);
    const PlatformPreset preset = load_platform_preset(a.platform);
    FrameSequence seq = load_sequence(a.input);
    const auto trace = load_budget_trace(a.trace);
    SimulationOptions options;
    options.frame_rate = a.fps;
    options.check_period_s = a.check_period;
    options.sample_frames = a.sample_frames;
    if (!a.regressor.empty()) options.regressor = load_regressor(a.regressor);
    const auto report = run_simulation(seq, trace, spec, preset, options);
    const std::string text = report_to_json(report);
    emit(text, a.out, out);
    fs::path csv = fs::path(a.out).replace_extension(".csv");
    std::ofstream file(csv);
    if (!file) throw IoError("cannot write " + csv.string());
    file << report_to_csv(report);
    out << json{{"report", a.out}, {"csv", csv.string()}, {"adaptations", report.adaptations}}.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-light video enhancement with energy-aware adaptation", "lumen"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)");

    EnhanceArgs enhance;
    auto* enhance_cmd = app.add_subcommand("enhance", "Enhance a directory of frames under a reuse config");
    enhance_cmd->add_option("--input", enhance.input, "Input frame directory")->required();
    enhance_cmd->add_option("--output", enhance.output, "Output frame directory")->required();
    enhance_cmd->add_option("--weights", enhance.weights, "Network weights JSON")->required();
    enhance_cmd->add_option("--theta-f", enhance.theta_f, "Frames reusing each keyframe's gamma map (0-10)");
    enhance_cmd->add_option("--theta-l", enhance.theta_l, "Leading conv layers reused (0-3)");
    enhance_cmd->add_option("--theta-d", enhance.theta_d, "Down-sampling rate: 1, 1/2 or 1/3");

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "Quality and temporal-stability metrics");
    metrics_cmd->add_option("--reference", metrics.reference, "Reference frame");
    metrics_cmd->add_option("--test", metrics.test, "Frame compared against the reference");
    metrics_cmd->add_option("--sequence", metrics.sequence, "Frame directory for temporal metrics");
    metrics_cmd->add_option("--out", metrics.out, "Write JSON here instead of stdout");

    ProfileArgs profile;
    auto* profile_cmd = app.add_subcommand("profile", "Per-layer MAC / memory / energy table");
    profile_cmd->add_option("--weights", profile.weights, "Network weights JSON")->required();
    profile_cmd->add_option("--resolution", profile.resolution, "Frame size HxW")->required();
    profile_cmd->add_option("--platform", profile.platform, "Platform preset JSON")->required();
    profile_cmd->add_option("--epsilon", profile.epsilon, "Cache-hit-rate in [0, 1]");
    profile_cmd->add_option("--measured-mac-rate", profile.measured_mac_rate, "Measured MACs per ms");
    profile_cmd->add_option("--cache-trace", profile.cache_trace, "CSV time_s,epsilon");
    profile_cmd->add_option("--theta-f", profile.theta_f, "Frames reusing each keyframe's gamma map (0-10)");
    profile_cmd->add_option("--theta-l", profile.theta_l, "Leading conv layers reused (0-3)");
    profile_cmd->add_option("--theta-d", profile.theta_d, "Down-sampling rate: 1, 1/2 or 1/3");
    profile_cmd->add_option("--frames", profile.frames, "Frames for the config energy total");
    profile_cmd->add_option("--out", profile.out, "Write JSON here instead of stdout");

    ParetoArgs pareto;
    auto* pareto_cmd = app.add_subcommand("pareto", "Evaluate all 132 configs and their Pareto frontier");
    pareto_cmd->add_option("--weights", pareto.weights, "Network weights JSON")->required();
    pareto_cmd->add_option("--sample", pareto.sample, "Sample frame directory")->required();
    pareto_cmd->add_option("--platform", pareto.platform, "Platform preset JSON")->required();
    pareto_cmd->add_option("--epsilon", pareto.epsilon, "Cache-hit-rate in [0, 1]");
    pareto_cmd->add_option("--regressor", pareto.regressor, "Quality regressor JSON");
    pareto_cmd->add_option("--out", pareto.out, "Write JSON here instead of stdout");

    SimulateArgs simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Replay a budget trace through the adaptation loop");
    simulate_cmd->add_option("--input", simulate.input, "Input frame directory")->required();
    simulate_cmd->add_option("--trace", simulate.trace, "Budget trace CSV")->required();
    simulate_cmd->add_option("--weights", simulate.weights, "Network weights JSON")->required();
    simulate_cmd->add_option("--platform", simulate.platform, "Platform preset JSON")->required();
    simulate_cmd->add_option("--out", simulate.out, "Report JSON path (CSV written alongside)")->required();
    simulate_cmd->add_option("--fps", simulate.fps, "Frame rate of the input");
    simulate_cmd->add_option("--check-period", simulate.check_period, "Controller period in seconds");
    simulate_cmd->add_option("--sample-frames", simulate.sample_frames, "Frames used to evaluate configs");
    simulate_cmd->add_option("--regressor", simulate.regressor, "Quality regressor JSON");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        set_thread_limit(threads);
        if (*enhance_cmd) run_enhance(enhance, out);
        if (*metrics_cmd) run_metrics(metrics, out);
        if (*profile_cmd) run_profile(profile, out);
        if (*pareto_cmd) run_pareto(pareto, out);
        if (*simulate_cmd) run_simulate(simulate, out);
    } catch (const std::exception& e) {
        err << "lumen: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace lumen::cli
