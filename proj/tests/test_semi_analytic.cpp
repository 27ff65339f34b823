#include <gtest/gtest.h>

#include <random>

#include <hofail/analytic.hpp>
#include <hofail/monte_carlo.hpp>
#include <hofail/semi_analytic.hpp>

#include "oracles.hpp"

using namespace hofail;
using namespace hofail::semi_analytic;

namespace {

const CellGeometry kGeom = CellGeometry::reference();

Histogram delta_at(double r0) { return Histogram::from_weights({r0, r0 + 1e-6}, {1.0}); }

// A skewed density with negative support, shaped like the fading offsets.
Histogram fading_like()
{
    return Histogram::from_weights({-12.0, -6.0, -2.0, 0.0, 2.0, 5.0, 9.0, 16.0}, {0.5, 2.0, 4.0, 6.0, 3.0, 1.5, 0.4});
}

}  // namespace

TEST(SemiAnalytic, DeltaBinMatchesDeterministicOffset)
{
    const MobilityConfig m(33.33, 0.48, 0.48, 0.2);
    for (double r0 : {-20.0, -3.0, 0.0, 2.5, 10.0, 25.0}) {
        const auto ref = oracle::theta_events(64, 50, 78, m.macro_travel() + r0, m.pico_travel() + r0, 200'000);
        const auto h = delta_at(r0);
        EXPECT_NEAR(mue_hf_empirical(kGeom, m, h), ref.mue_hf, 1e-4) << r0;
        EXPECT_NEAR(pue_hf_empirical(kGeom, m, h), ref.pue_hf, 1e-4) << r0;
        EXPECT_NEAR(nho_empirical(kGeom, m, h), ref.nho, 1e-4) << r0;
    }
}

TEST(SemiAnalytic, UniformSingleBinMatchesAnalyticOnGrid)
{
    for (double ttt : {40.0, 80.0, 160.0, 480.0})
        for (double td : {50.0, 150.0, 200.0})
            for (double kmh = 10; kmh <= 120; kmh += 10) {
                const auto m = MobilityConfig::from_kmh_ms(kmh, ttt, ttt, td);
                const Histogram u({0.0, m.sampling_travel()}, {1.0 / m.sampling_travel()});
                EXPECT_NEAR(mue_hf_empirical(kGeom, m, u), analytic::mue_hf_probability(kGeom, m), 1e-6);
                EXPECT_NEAR(pue_hf_empirical(kGeom, m, u), analytic::pue_hf_probability(kGeom, m), 1e-6);
                EXPECT_NEAR(nho_empirical(kGeom, m, u), analytic::nho_probability(kGeom, m), 1e-6);
            }
}

TEST(SemiAnalytic, MatchesMonteCarloOnSameHistogram)
{
    const auto m = MobilityConfig::from_kmh_ms(120, 480, 480, 40);
    const auto h = fading_like();
    mc::RunOptions opts;
    opts.trials = 2'000'000;
    opts.seed = 3;
    const auto counts = mc::simulate(kGeom, m, mc::OffsetModel::empirical(h, mc::OffsetMode::Shared), opts);
    EXPECT_NEAR(mue_hf_empirical(kGeom, m, h), mc::estimate_from_counts(mc::Metric::MueHF, counts).p_hat, 0.005);
    EXPECT_NEAR(pue_hf_empirical(kGeom, m, h), mc::estimate_from_counts(mc::Metric::PueHF, counts).p_hat, 0.005);
    EXPECT_NEAR(nho_empirical(kGeom, m, h), mc::estimate_from_counts(mc::Metric::NoHandover, counts).p_hat, 0.005);
}

TEST(SemiAnalytic, NonPositiveTravelGivesNoFailure)
{
    const MobilityConfig m(10.0, 0.16, 0.16, 0.2);
    const auto h = Histogram({-30.0, -m.macro_travel() - 1.0}, {1.0 / (30.0 - m.macro_travel() - 1.0)});
    EXPECT_EQ(mue_hf_empirical(kGeom, m, h), 0.0);
    EXPECT_EQ(pue_hf_empirical(kGeom, m, h), 0.0);
}

TEST(SemiAnalytic, SupportFarAboveSaturates)
{
    const MobilityConfig m(33.33, 0.48, 0.48, 0.2);
    const auto h = Histogram({200.0, 210.0}, {0.1});
    EXPECT_NEAR(mue_hf_empirical(kGeom, m, h), 1.0 - 2.0 / oracle::pi * std::atan(std::sqrt(1596.0) / 50.0), 1e-9);
}

TEST(SemiAnalyticInvariants, ShiftWeaklyIncreasesMueHf)
{
    const auto h = fading_like();
    for (double kmh : {30.0, 60.0, 120.0})
        for (double ttt : {40.0, 160.0, 480.0}) {
            const auto m = MobilityConfig::from_kmh_ms(kmh, ttt, ttt, 50);
            double prev = -1.0;
            for (double delta : {0.0, 1.0, 2.0, 5.0}) {
                const double p = mue_hf_empirical(kGeom, m, h.shifted(delta));
                EXPECT_GE(p, prev - 1e-9);
                prev = p;
            }
        }
}

TEST(SemiAnalyticInvariants, NormalizationInsensitive)
{
    const auto h = fading_like();
    auto w = h.density();
    std::vector<double> weights;
    for (std::size_t i = 0; i < h.bins(); ++i)
        weights.push_back(h.bin_mass(i) * 7.3);
    const auto rescaled = Histogram::from_weights(h.edges(), weights);
    const auto m = MobilityConfig::from_kmh_ms(90, 480, 480, 50);
    EXPECT_NEAR(mue_hf_empirical(kGeom, m, h), mue_hf_empirical(kGeom, m, rescaled), 1e-12);
    EXPECT_NEAR(pue_hf_empirical(kGeom, m, h), pue_hf_empirical(kGeom, m, rescaled), 1e-12);
}

TEST(SemiAnalyticInvariants, RandomHistogramsStayInUnitInterval)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const int bins = 1 + static_cast<int>(u(rng) * 30);
        std::vector<double> edges{-40.0 + 60.0 * u(rng)};
        std::vector<double> w;
        for (int b = 0; b < bins; ++b) {
            edges.push_back(edges.back() + 0.01 + 5.0 * u(rng));
            w.push_back(u(rng) < 0.2 ? 0.0 : u(rng));
        }
        w[0] += 1e-3;
        const auto h = Histogram::from_weights(edges, w);
        const MobilityConfig m(40.0 * u(rng), 0.04 + 0.5 * u(rng), 0.04 + 0.5 * u(rng), 0.04 + 0.2 * u(rng));
        for (double p : {mue_hf_empirical(kGeom, m, h), pue_hf_empirical(kGeom, m, h), nho_empirical(kGeom, m, h)}) {
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 1.0);
        }
    }
}
