#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <hofail/analytic.hpp>
#include <hofail/monte_carlo.hpp>

#include "oracles.hpp"

using namespace hofail;
using namespace hofail::mc;

namespace {

const CellGeometry kGeom = CellGeometry::reference();

RunOptions opts(std::uint64_t trials, std::uint64_t seed = 1, double ppt = 1.0)
{
    RunOptions o;
    o.trials = trials;
    o.seed = seed;
    o.ping_pong_threshold = ppt;
    return o;
}

}  // namespace

TEST(ClassifyTrial, DiameterHitsHfCircle)
{
    const MobilityConfig m(10.0, 1.0, 1.0, 0.2);
    EXPECT_EQ(classify_trial(kGeom, m, 0.0, 5.0, 0.0, 1.0).kind, OutcomeKind::MueHandoverFailure);
    EXPECT_EQ(classify_trial(kGeom, m, 0.0, 4.0, 0.0, 1.0).kind, OutcomeKind::MueHandoverFailure);
    EXPECT_EQ(classify_trial(kGeom, m, 0.0, 3.9, 0.0, 1.0).kind, OutcomeKind::HandoverSuccess);
}

TEST(ClassifyTrial, OutcomesFollowGeometry)
{
    const MobilityConfig m(10.0, 0.1, 0.1, 0.2);
    // Tangential chord, short enough to exit before TTT expiry.
    const double theta = 1.5;
    ASSERT_LT(chord_length(64, theta), 10.0);
    EXPECT_EQ(classify_trial(kGeom, m, theta, 9.0, 0.0, 1.0).kind, OutcomeKind::NoHandover);
    // Diameter, short TTT on both legs: success with a long stay.
    const auto ok = classify_trial(kGeom, m, 0.0, 0.5, 0.5, 1.0);
    EXPECT_EQ(ok.kind, OutcomeKind::HandoverSuccess);
    EXPECT_NEAR(*ok.time_of_stay, 128.0 / 10.0, 1e-12);
    // Outbound travel beyond r_p − R on the diameter.
    EXPECT_EQ(classify_trial(kGeom, m, 0.0, 0.5, 14.5, 1.0).kind, OutcomeKind::PueHandoverFailure);
    // Short stay becomes a ping-pong.
    EXPECT_EQ(classify_trial(kGeom, m, 0.0, 0.5, 0.5, 100.0).kind, OutcomeKind::PingPong);
}

TEST(ClassifyTrial, ZeroSpeedStaysForever)
{
    const MobilityConfig m(0.0, 0.48, 0.48, 0.2);
    const auto o = classify_trial(kGeom, m, 0.2, 0.0, 0.0, 1e9);
    EXPECT_EQ(o.kind, OutcomeKind::HandoverSuccess);
    EXPECT_TRUE(std::isinf(*o.time_of_stay));
}

TEST(RunTrial, CaseOneNeverFails)
{
    const MobilityConfig m(8.333, 0.48, 0.48, 0.2);
    const auto offsets = OffsetModel::uniform(m);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100'000; ++i)
        ASSERT_NE(run_trial(kGeom, m, offsets, 1.0, rng).kind, OutcomeKind::MueHandoverFailure);
}

TEST(RunTrial, SharedModeReusesOffset)
{
    const MobilityConfig m(20.0, 0.1, 0.1, 0.2);
    const auto offsets = OffsetModel::uniform(m, OffsetMode::Shared);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 1000; ++i) {
        const auto o = run_trial(kGeom, m, offsets, 1.0, rng);
        ASSERT_EQ(o.offset_in, o.offset_out);
    }
}

TEST(Estimate, ImpossibleEventIsExactlyZero)
{
    const MobilityConfig m(8.333, 0.48, 0.48, 0.2);
    const auto e = estimate(Metric::MueHF, kGeom, m, OffsetModel::uniform(m), opts(100'000));
    EXPECT_EQ(e.p_hat, 0.0);
    EXPECT_EQ(e.half_width_95, 0.0);
}

TEST(Estimate, SaturatedMueHf)
{
    const MobilityConfig m(500.0, 0.48, 0.48, 0.2);
    const auto e = estimate(Metric::MueHF, kGeom, m, OffsetModel::uniform(m), opts(10'000'000, 7));
    EXPECT_NEAR(e.p_hat, 1.0 - 2.0 / oracle::pi * std::atan(std::sqrt(1596.0) / 50.0), 0.0005);
    EXPECT_NEAR(e.half_width_95, 1.96 * std::sqrt(e.p_hat * (1 - e.p_hat) / 1e7), 1e-15);
}

TEST(Estimate, DeterministicAndWorkerIndependent)
{
    const auto m = MobilityConfig::from_kmh_ms(90, 160, 160, 200);
    auto a = opts(300'000, 42);
    auto b = a;
    a.workers = 1;
    b.workers = 4;
    const auto ca = simulate(kGeom, m, OffsetModel::uniform(m), a);
    const auto cb = simulate(kGeom, m, OffsetModel::uniform(m), b);
    EXPECT_EQ(ca, cb);
    const auto e1 = estimate(Metric::PueHF, kGeom, m, OffsetModel::uniform(m), a);
    const auto e2 = estimate(Metric::PueHF, kGeom, m, OffsetModel::uniform(m), a);
    EXPECT_EQ(e1.p_hat, e2.p_hat);
    EXPECT_NE(simulate(kGeom, m, OffsetModel::uniform(m), opts(300'000, 43)), ca);
}

TEST(Estimate, RejectsTooFewTrials)
{
    const MobilityConfig m(10, 0.1, 0.1, 0.1);
    EXPECT_THROW(estimate(Metric::MueHF, kGeom, m, OffsetModel::uniform(m), opts(9'999)), std::invalid_argument);
}

TEST(Estimate, CountsPartitionTrials)
{
    const auto m = MobilityConfig::from_kmh_ms(120, 480, 480, 200);
    const auto c = simulate(kGeom, m, OffsetModel::uniform(m), opts(200'000, 2));
    std::uint64_t sum = 0;
    for (auto n : c.by_kind)
        sum += n;
    EXPECT_EQ(sum, c.trials);
    EXPECT_EQ(c.trials, 200'000u);
}

TEST(PingPong, ZeroThresholdIsZero)
{
    const auto m = MobilityConfig::from_kmh_ms(120, 40, 40, 50);
    EXPECT_EQ(ping_pong_probability(kGeom, m, OffsetModel::uniform(m), opts(100'000, 1, 0.0)).p_hat, 0.0);
}

TEST(PingPong, InfiniteThresholdEqualsDoubleSuccess)
{
    const auto m = MobilityConfig::from_kmh_ms(120, 40, 40, 50);
    const auto o = OffsetModel::uniform(m);
    const auto finite = simulate(kGeom, m, o, opts(200'000, 9, 1.0));
    const auto inf = simulate(kGeom, m, o, opts(200'000, 9, INFINITY));
    EXPECT_EQ(inf[OutcomeKind::HandoverSuccess], 0u);
    EXPECT_EQ(inf[OutcomeKind::PingPong],
              finite[OutcomeKind::HandoverSuccess] + finite[OutcomeKind::PingPong]);
}

TEST(PingPong, NonIncreasingInSamplingPeriod)
{
    double prev = 2.0;
    double prev_hw = 0.0;
    for (double td : {50.0, 100.0, 200.0}) {
        const auto m = MobilityConfig::from_kmh_ms(60, 80, 80, td);
        const auto e = ping_pong_probability(kGeom, m, OffsetModel::uniform(m), opts(1'000'000, 11, 1.0));
        EXPECT_LE(e.p_hat, prev + prev_hw + e.half_width_95) << td;
        prev = e.p_hat;
        prev_hw = e.half_width_95;
    }
}

TEST(MonteCarloOracle, SharedModeMatchesClosedForms)
{
    for (double ttt : {40.0, 160.0, 480.0})
        for (double kmh : {30.0, 90.0, 120.0}) {
            const auto m = MobilityConfig::from_kmh_ms(kmh, ttt, ttt, 150);
            const auto c = simulate(kGeom, m, OffsetModel::uniform(m, OffsetMode::Shared), opts(1'000'000, 4));
            const auto check = [&](Metric k, double analytic_p) {
                const auto e = estimate_from_counts(k, c);
                EXPECT_NEAR(e.p_hat, analytic_p, std::max(0.005, 4.0 * std::sqrt(e.p_hat * (1 - e.p_hat) / 1e6)))
                    << ttt << " " << kmh;
            };
            check(Metric::NoHandover, analytic::nho_probability(kGeom, m));
            check(Metric::MueHF, analytic::mue_hf_probability(kGeom, m));
            check(Metric::PueHF, analytic::pue_hf_probability(kGeom, m));
        }
}

TEST(MonteCarloOracle, IndependentModeStaysClose)
{
    const auto m = MobilityConfig::from_kmh_ms(120, 480, 480, 200);
    const auto c = simulate(kGeom, m, OffsetModel::uniform(m), opts(1'000'000, 4));
    EXPECT_NEAR(estimate_from_counts(Metric::PueHF, c).p_hat, analytic::pue_hf_probability(kGeom, m), 0.005);
}
