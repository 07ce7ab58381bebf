#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lumen/error.hpp"
#include "lumen/flow.hpp"
#include "support/synthetic.hpp"

using namespace lumen;

namespace {

struct MeanFlow {
    double dx = 0.0;
    double dy = 0.0;
};

MeanFlow interior_mean(const FlowField& f, std::size_t border) {
    MeanFlow m;
    std::size_t n = 0;
    for (std::size_t y = border; y + border < f.height; ++y)
        for (std::size_t x = border; x + border < f.width; ++x) {
            m.dx += f.dx(y, x);
            m.dy += f.dy(y, x);
            ++n;
        }
    m.dx /= static_cast<double>(n);
    m.dy /= static_cast<double>(n);
    return m;
}

}  // namespace

TEST(EstimateFlow, IdenticalFramesNearZero) {
    const Frame f = lumen::test::textured_frame(64, 80);
    EXPECT_LE(estimate_flow(f, f).max_magnitude(), 0.1);
}

TEST(EstimateFlow, TwoPixelHorizontalShift) {
    const FrameSequence seq = lumen::test::pan_sequence(2, 72, 96, 2.0);
    const FlowField flow = estimate_flow(seq[0], seq[1]);
    const MeanFlow m = interior_mean(flow, 12);
    EXPECT_NEAR(m.dx, 2.0, 0.5);
    EXPECT_NEAR(m.dy, 0.0, 0.5);
}

TEST(EstimateFlow, VerticalShift) {
    // Transposing the texture turns a horizontal pan into a vertical one.
    const FrameSequence seq = lumen::test::pan_sequence(2, 96, 72, 1.0);
    Frame a(72, 96), b(72, 96);
    for (std::size_t y = 0; y < 72; ++y)
        for (std::size_t x = 0; x < 96; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                a.at(y, x, c) = seq[0].at(x, y, c);
                b.at(y, x, c) = seq[1].at(x, y, c);
            }
    const MeanFlow m = interior_mean(estimate_flow(b, a), 12);
    EXPECT_NEAR(m.dy, -1.0, 0.5);
    EXPECT_NEAR(m.dx, 0.0, 0.5);
}

TEST(EstimateFlow, TexturelessIsZero) {
    const FlowField flow = estimate_flow(Frame(40, 40, 0.3), Frame(40, 40, 0.3));
    for (double v : flow.vectors) EXPECT_EQ(v, 0.0);
    const FlowField moved = estimate_flow(Frame(40, 40, 0.3), Frame(40, 40, 0.35));
    EXPECT_LE(moved.max_magnitude(), 0.1);
}

TEST(EstimateFlow, FiniteOnNoise) {
    std::mt19937_64 rng(31);
    const FlowField flow = estimate_flow(lumen::test::random_frame(33, 29, rng),
                                         lumen::test::random_frame(33, 29, rng));
    for (double v : flow.vectors) EXPECT_TRUE(std::isfinite(v));
}

TEST(EstimateFlow, DimensionMismatch) {
    EXPECT_THROW(estimate_flow(Frame(10, 10), Frame(10, 11)), DimensionError);
}

TEST(Warp, ZeroFlowIdentity) {
    std::mt19937_64 rng(32);
    const Frame f = lumen::test::random_frame(9, 7, rng);
    EXPECT_EQ(warp(f, FlowField(9, 7)), f);
}

TEST(Warp, IntegerShiftOnRamp) {
    Frame f(4, 6);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 6; ++x)
            for (std::size_t c = 0; c < 3; ++c) f.at(y, x, c) = static_cast<double>(x) / 10.0;
    FlowField flow(4, 6);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 6; ++x) flow.dx(y, x) = 1.0;
    const Frame out = warp(f, flow);
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(out.at(y, x, 1), (x + 1) / 10.0);
        EXPECT_DOUBLE_EQ(out.at(y, 5, 1), 0.5);
    }
}

TEST(Warp, ConstantStaysConstant) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    FlowField flow(8, 8);
    for (auto& v : flow.vectors) v = u(rng);
    const Frame out = warp(Frame(8, 8, 0.42), flow);
    for (double v : out.data()) EXPECT_NEAR(v, 0.42, 1e-15);
}

TEST(Warp, DimensionMismatch) {
    EXPECT_THROW(warp(Frame(4, 4), FlowField(4, 5)), DimensionError);
}

TEST(Warp, RoundTripSmallShifts) {
    for (double s : {1.0, 2.0, 3.0}) {
        const FrameSequence seq = lumen::test::pan_sequence(2, 64, 96, s);
        const Frame aligned = warp(seq[0], estimate_flow(seq[0], seq[1]));
        const Plane a = luminance(aligned), b = luminance(seq[1]);
        double err = 0.0;
        std::size_t n = 0;
        for (std::size_t y = 8; y < 56; ++y)
            for (std::size_t x = 8; x < 88; ++x, ++n) err += std::abs(a(y, x) - b(y, x));
        EXPECT_LE(err / static_cast<double>(n), 0.05) << "shift " << s;
    }
}
