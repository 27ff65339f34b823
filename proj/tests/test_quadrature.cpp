#include <gtest/gtest.h>

#include <cmath>

#include <hofail/analytic.hpp>
#include <hofail/quadrature.hpp>

#include "oracles.hpp"

using namespace hofail;

TEST(Quadrature, Polynomial) { EXPECT_NEAR(integrate([](double x) { return x; }, 0.0, 1.0), 0.5, 1e-12); }

TEST(Quadrature, EmptyIntervalAndBadSpec)
{
    EXPECT_EQ(integrate([](double) { return 1.0; }, 2.0, 2.0), 0.0);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 2.0, 1.0), std::invalid_argument);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, {0.0, 100}), std::invalid_argument);
    EXPECT_THROW(integrate([](double) { return 1.0; }, 0.0, 1.0, {1e-8, 4}), std::invalid_argument);
}

TEST(Quadrature, ChordPdfNormalizationByThetaSubstitution)
{
    // l = 2R cos θ maps f₁(l) dl onto the uniform density 1/π on (−π/2, π/2).
    const double R = 64.0;
    const auto f = [&](double theta) {
        const double l = 2.0 * R * std::cos(theta);
        const double jac = 2.0 * R * std::abs(std::sin(theta));
        return 2.0 / (oracle::pi * std::sqrt(4.0 * R * R - l * l)) * jac;
    };
    EXPECT_NEAR(integrate(f, 0.0, oracle::pi / 2.0, {1e-12, 2000}), 1.0, 1e-9);
}

TEST(Quadrature, KinkedIntegrandWithBreaks)
{
    const auto f = [](double x) { return std::abs(x - 0.3) + (x > 0.7 ? 1.0 : 0.0); };
    const double exact = 0.5 * 0.09 + 0.5 * 0.49 + 0.3;
    EXPECT_NEAR(integrate_piecewise(f, 0.0, 1.0, {0.3, 0.7, 5.0, -1.0}), exact, 1e-10);
    EXPECT_NEAR(integrate(f, 0.0, 1.0, {1e-9, 4000}), exact, 1e-8);
}

TEST(Quadrature, ReportsNonConvergenceWithEstimate)
{
    const auto wild = [](double x) { return std::sin(1.0 / (x + 1e-9)); };
    try {
        integrate(wild, 0.0, 1.0, {1e-14, 10});
        FAIL() << "expected QuadratureError";
    } catch (const QuadratureError& e) {
        EXPECT_TRUE(std::isfinite(e.best_estimate()));
        EXPECT_GT(e.error_estimate(), 1e-14);
    }
}

TEST(Quadrature, I1IntegralMatchesRiemannOracle)
{
    const auto g = CellGeometry::reference();
    const auto m = MobilityConfig(33.33, 0.48, 0.48, 0.2);
    const double vtm = m.macro_travel();
    const double R = 64.0, K = 64.0 * 64.0 - 50.0 * 50.0, s = std::sqrt(K);
    // arcsin form of the same angle, computed without the library.
    const auto i1_ref = [&](double rd) {
        const double x = vtm + rd;
        if (x >= s)
            return std::asin(s / R);
        return std::asin(std::min(1.0, (K / x + x) / (2.0 * R)));
    };
    const double ref = oracle::midpoint(i1_ref, 0.0, m.sampling_travel(), 1'000'000);
    const double got = integrate_piecewise([&](double rd) { return analytic::detail::i1(g, vtm + rd); }, 0.0,
                                           m.sampling_travel(), {R - 50.0 - vtm, s - vtm}, {1e-10, 2000});
    EXPECT_NEAR(got, ref, 1e-6);
}
