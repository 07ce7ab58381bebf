#include <gtest/gtest.h>

#include <random>

#include "json.hpp"
#include "lumen/controller.hpp"
#include "lumen/energy.hpp"
#include "lumen/error.hpp"
#include "lumen/metrics.hpp"
#include "lumen/resample.hpp"
#include "lumen/scheduler.hpp"
#include "support/synthetic.hpp"

using namespace lumen;

namespace {

std::vector<FrameAction> actions(const std::vector<FramePlan>& plans) {
    std::vector<FrameAction> out;
    for (const auto& p : plans) out.push_back(p.action);
    return out;
}

constexpr auto F = FrameAction::FullCompute;
constexpr auto P = FrameAction::PartialCompute;
constexpr auto R = FrameAction::ReuseMap;

NetworkSpec weights() { return load_weights(LUMEN_DEFAULT_WEIGHTS); }

}  // namespace

TEST(ReuseConfig, Membership) {
    EXPECT_TRUE((ReuseConfig{10, 3, 3}).valid());
    EXPECT_FALSE((ReuseConfig{11, 0, 1}).valid());
    EXPECT_FALSE((ReuseConfig{0, -1, 1}).valid());
    EXPECT_FALSE((ReuseConfig{0, 0, 4}).valid());
    EXPECT_THROW((ReuseConfig{0, 4, 1}).validate(), ValidationError);
    EXPECT_EQ(parse_theta_d("1/2"), 2);
    EXPECT_EQ(parse_theta_d("1"), 1);
    EXPECT_EQ(theta_d_string(3), "1/3");
    EXPECT_THROW(parse_theta_d("1/4"), ValidationError);
    EXPECT_THROW(parse_theta_d("0.5"), ValidationError);
}

TEST(ExpandConfig, Examples) {
    EXPECT_EQ(actions(expand_config({0, 0, 1}, 3)), (std::vector{F, F, F}));
    EXPECT_EQ(actions(expand_config({0, 2, 1}, 3)), (std::vector{F, P, P}));
    EXPECT_EQ(actions(expand_config({1, 0, 1}, 4)), (std::vector{F, R, F, R}));
    EXPECT_EQ(actions(expand_config({1, 1, 1}, 4)), (std::vector{F, R, P, R}));
    EXPECT_EQ(actions(expand_config({10, 0, 1}, 5)), (std::vector{F, R, R, R, R}));
    for (const auto& p : expand_config({2, 1, 3}, 7)) EXPECT_EQ(p.resolution_divisor, 3);
    for (const auto& c : enumerate_configs()) EXPECT_EQ(expand_config(c, 12).front().action, F);
}

TEST(EnhanceSequence, DegenerateConfigMatchesSingleFramePath) {
    const NetworkSpec spec = weights();
    FrameSequence seq;
    seq.frames.push_back(lumen::test::textured_frame(24, 32));
    const EnhanceResult r = enhance_sequence(seq, spec, {0, 0, 1});
    EXPECT_EQ(r.output[0], apply_gamma_curve(seq[0], forward(spec, seq[0])));
}

TEST(EnhanceSequence, FullConfigBitIdenticalPerFrame) {
    const NetworkSpec spec = weights();
    const FrameSequence seq = lumen::test::pan_sequence(4, 20, 28, 1.5);
    const EnhanceResult r = enhance_sequence(seq, spec, {0, 0, 1});
    for (std::size_t i = 0; i < seq.size(); ++i)
        EXPECT_EQ(r.output[i], apply_gamma_curve(seq[i], forward(spec, seq[i])));
}

TEST(EnhanceSequence, IdenticalFramesStayIdentical) {
    const NetworkSpec spec = weights();
    const FrameSequence seq = lumen::test::static_sequence(5, 16, 20);
    for (const auto& c : {ReuseConfig{0, 0, 1}, ReuseConfig{1, 1, 2}, ReuseConfig{3, 3, 3}, ReuseConfig{0, 2, 1}}) {
        const EnhanceResult r = enhance_sequence(seq, spec, c);
        for (std::size_t i = 1; i < r.output.size(); ++i) EXPECT_EQ(r.output[i], r.output[0]);
        EXPECT_DOUBLE_EQ(tssim(r.output), 1.0);
        EXPECT_EQ(mabd(r.output), 0.0);
    }
}

TEST(EnhanceSequence, FrameReuseCarriesGammaMap) {
    const NetworkSpec spec = weights();
    const FrameSequence seq = lumen::test::pan_sequence(2, 18, 22, 2.0);
    const EnhanceResult r = enhance_sequence(seq, spec, {1, 0, 1}, true);
    ASSERT_EQ(r.gammas.size(), 2u);
    EXPECT_EQ(r.gammas[1], r.gammas[0]);
    EXPECT_EQ(r.output[1], apply_gamma_curve(seq[1], r.gammas[0]));
    EXPECT_EQ(r.plans[1].action, R);
}

TEST(EnhanceSequence, DownsampledGammaIsUpsampled) {
    const NetworkSpec spec = weights();
    const FrameSequence seq = lumen::test::pan_sequence(1, 30, 36, 0.0);
    const EnhanceResult r = enhance_sequence(seq, spec, {0, 0, 3}, true);
    const GammaMap expected = resample(forward(spec, downsample(seq[0], 3)), 30, 36);
    EXPECT_EQ(r.gammas[0], expected);
    EXPECT_EQ(r.output[0].height(), 30u);
}

TEST(EnhanceSequence, PlansMatchEnergyMasks) {
    const NetworkSpec spec = weights();
    const FrameSequence seq = lumen::test::pan_sequence(13, 12, 12, 1.0);
    for (const auto& c : enumerate_configs()) {
        const EnhanceResult r = enhance_sequence(seq, spec, c);
        const auto plans = expand_config(c, seq.size());
        ASSERT_EQ(r.plans, plans) << to_string(c);
        const std::size_t prefix = reused_prefix_length(spec, c.theta_l);
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto mask = layer_mask(plans[i], spec.layers.size(), prefix);
            EXPECT_EQ(r.layers_computed[i], static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)));
        }
    }
}

TEST(EnhanceSequence, MoreFrameReuseNeverMoreExecutions) {
    const NetworkSpec spec = default_topology();
    const FrameSequence seq = lumen::test::pan_sequence(23, 8, 8, 1.0);
    for (int l = 0; l <= 3; ++l) {
        std::size_t prev = SIZE_MAX;
        for (int f = 0; f <= 10; ++f) {
            const EnhanceResult r = enhance_sequence(seq, spec, {f, l, 1});
            const auto runs = static_cast<std::size_t>(
                std::count_if(r.plans.begin(), r.plans.end(), [](const FramePlan& p) { return p.action != R; }));
            EXPECT_LE(runs, prev);
            prev = runs;
        }
    }
}

TEST(EnhanceSequence, LengthAndDimsPreserved) {
    const FrameSequence seq = lumen::test::pan_sequence(6, 19, 23, 1.0);
    const EnhanceResult r = enhance_sequence(seq, weights(), {2, 1, 2});
    ASSERT_EQ(r.output.size(), 6u);
    for (const auto& f : r.output.frames) EXPECT_TRUE(f.same_shape(seq[0]));
    EXPECT_EQ(r.latency.per_frame_ms.size(), 6u);
    EXPECT_THROW(enhance_sequence(FrameSequence{}, weights(), {0, 0, 1}), ValidationError);
}

TEST(StreamEnhancer, ConfigSwapRestartsPeriod) {
    const FrameSequence seq = lumen::test::pan_sequence(5, 10, 10, 1.0);
    StreamEnhancer s(weights(), {3, 0, 1});
    EXPECT_EQ(s.process(seq[0]).plan.action, F);
    EXPECT_EQ(s.process(seq[1]).plan.action, R);
    s.set_config({1, 2, 1});
    EXPECT_EQ(s.process(seq[2]).plan.action, F);
    EXPECT_EQ(s.process(seq[3]).plan.action, R);
    EXPECT_EQ(s.process(seq[4]).plan.action, P);
    EXPECT_EQ(s.frames_processed(), 5u);
}

TEST(PlanJson, Layout) {
    const FrameSequence seq = lumen::test::pan_sequence(3, 10, 10, 1.0);
    const EnhanceResult r = enhance_sequence(seq, weights(), {1, 0, 2});
    const auto doc = nlohmann::json::parse(plan_to_json({1, 0, 2}, r.plans, r.latency));
    EXPECT_EQ(doc["config"]["theta_d"], "1/2");
    ASSERT_EQ(doc["frames"].size(), 3u);
    EXPECT_EQ(doc["frames"][1]["action"], "reuse_map");
    EXPECT_EQ(doc["frames"][2]["action"], "full_compute");
    EXPECT_EQ(doc["frames"][0]["resolution_factor"], "1/2");
}
