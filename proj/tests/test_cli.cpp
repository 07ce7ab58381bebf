#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "lumen/cli.hpp"
#include "lumen/energy.hpp"
#include "lumen/imageio.hpp"
#include "support/synthetic.hpp"

using namespace lumen;
using nlohmann::json;
using lumen::test::TempDir;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "lumen");
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const std::string kWeights = LUMEN_DEFAULT_WEIGHTS;
const std::string kCpu = std::string(LUMEN_PRESET_DIR) + "/cpu.json";

void write_frames(const TempDir& dir, const FrameSequence& seq) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "f%03zu.png", i);
        save_frame(seq[i], dir / name);
    }
}

}  // namespace

TEST(Cli, ProfileTable) {
    const Result r = run({"profile", "--weights", kWeights, "--resolution", "270x480", "--epsilon", "0.7",
                          "--platform", kCpu});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    ASSERT_EQ(doc["layers"].size(), 9u);
    const double hw = 270.0 * 480.0;
    EXPECT_EQ(doc["layers"][2]["C_l"].get<double>(), 9 * hw);
    EXPECT_EQ(doc["layers"][2]["M_l"].get<double>(), 19 * hw);
    const double e2 = 9 * hw + 19 * hw * (0.7 * 6 + 0.3 * 200);
    EXPECT_NEAR(doc["layers"][2]["E_l"].get<double>(), e2, 1e-9 * e2);
    double sum = 0.0;
    for (const auto& l : doc["layers"]) sum += l["E_l"].get<double>();
    EXPECT_NEAR(doc["total"]["E"].get<double>(), sum, 1e-9 * sum);
    EXPECT_EQ(doc["total"]["C"].get<double>(), 37 * hw);
}

TEST(Cli, ProfileMeasuredRateAndConfig) {
    const Result r = run({"profile", "--weights", kWeights, "--resolution", "90x160", "--measured-mac-rate",
                          "12000000", "--platform", kCpu, "--theta-f", "1", "--theta-d", "1/2", "--frames", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_DOUBLE_EQ(doc["epsilon"].get<double>(), 0.5);
    EXPECT_NEAR(doc["config_energy"].get<double>(), doc["total"]["E"].get<double>(), 1e-6);
}

TEST(Cli, ProfileBadResolution) {
    const Result r = run({"profile", "--weights", kWeights, "--resolution", "270by480", "--platform", kCpu});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ParetoOutputs) {
    TempDir dir("cli_sample");
    write_frames(dir, lumen::test::pan_sequence(12, 20, 24, 1.0));
    const Result r = run({"--threads", "2", "pareto", "--weights", kWeights, "--sample", dir.path().string(),
                          "--platform", kCpu});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["points"].size(), 132u);
    EXPECT_GE(doc["frontier"].size(), 1u);
    EXPECT_EQ(doc["quality_source"], "oracle");
    const Result again = run({"pareto", "--weights", kWeights, "--sample", dir.path().string(), "--platform", kCpu});
    EXPECT_EQ(again.out, r.out);
}

TEST(Cli, EnhanceWritesFramesAndPlan) {
    TempDir in("cli_in"), out("cli_out");
    write_frames(in, lumen::test::pan_sequence(4, 16, 20, 1.0));
    const Result r = run({"enhance", "--input", in.path().string(), "--output", out.path().string(), "--weights",
                          kWeights, "--theta-f", "1", "--theta-l", "0", "--theta-d", "1/2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(list_frame_files(out.path()).size(), 4u);
    const json plan = json::parse(lumen::test::read_text(out / "plan.json"));
    ASSERT_EQ(plan["frames"].size(), 4u);
    EXPECT_EQ(plan["frames"][1]["action"], "reuse_map");
    EXPECT_TRUE(plan["frames"][0].contains("latency_ms"));
    // Default weights brighten a dark input.
    EXPECT_GT(mean_luminance(load_frame(out / "f000.png")), mean_luminance(load_frame(in / "f000.png")));
}

TEST(Cli, EnhanceMissingWeightsIsUsageError) {
    const Result r = run({"enhance", "--input", "a", "--output", "b"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--weights"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"profile", "--weights", kWeights, "--resolution", "2x2", "--platform", kCpu, "--bogus"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, RuntimeErrors) {
    TempDir in("cli_in");
    write_frames(in, lumen::test::pan_sequence(2, 8, 8, 1.0));
    EXPECT_EQ(run({"enhance", "--input", in.path().string(), "--output", (in / "o").string(), "--weights",
                   "/nonexistent.json"})
                  .code,
              2);
    EXPECT_EQ(run({"enhance", "--input", in.path().string(), "--output", (in / "o").string(), "--weights", kWeights,
                   "--theta-d", "1/4"})
                  .code,
              2);
}

TEST(Cli, MetricsPairAndSequence) {
    TempDir dir("cli_metrics");
    save_frame(Frame(16, 16, 0.0), dir / "a.png");
    save_frame(Frame(16, 16, 1.0), dir / "b.png");
    const Result pair = run({"metrics", "--reference", (dir / "a.png").string(), "--test", (dir / "b.png").string()});
    ASSERT_EQ(pair.code, 0) << pair.err;
    const json p = json::parse(pair.out);
    EXPECT_DOUBLE_EQ(p["psnr"].get<double>(), 0.0);
    EXPECT_DOUBLE_EQ(p["mae"].get<double>(), 255.0);
    const Result seq = run({"metrics", "--sequence", dir.path().string(), "--out", (dir / "m.json").string()});
    ASSERT_EQ(seq.code, 0) << seq.err;
    const json s = json::parse(lumen::test::read_text(dir / "m.json"));
    EXPECT_NEAR(s["mabd"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(run({"metrics", "--reference", (dir / "a.png").string()}).code, 2);
}

TEST(Cli, SimulateWritesReportAndCsv) {
    TempDir in("cli_sim"), out("cli_sim_out");
    write_frames(in, lumen::test::pan_sequence(20, 16, 20, 1.0));
    lumen::test::write_text(in / "trace.csv", "time_s,supply_fraction,epsilon\n0,0.9,1\n1,0.4,1\n");
    const std::string report = (out / "report.json").string();
    const Result r = run({"simulate", "--input", in.path().string(), "--trace", (in / "trace.csv").string(),
                          "--weights", kWeights, "--platform", kCpu, "--out", report, "--fps", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(lumen::test::read_text(report));
    EXPECT_EQ(doc["intervals"].size(), 2u);
    EXPECT_EQ(doc["totals"]["frames"], 20);
    EXPECT_FALSE(lumen::test::read_text(out / "report.csv").empty());
    lumen::test::write_text(in / "empty.csv", "time_s,supply_fraction,epsilon\n");
    EXPECT_EQ(run({"simulate", "--input", in.path().string(), "--trace", (in / "empty.csv").string(), "--weights",
                   kWeights, "--platform", kCpu, "--out", report})
                  .code,
              2);
}
