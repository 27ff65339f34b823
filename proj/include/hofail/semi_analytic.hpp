#pragma once

// Handover-failure probabilities under fading: the uniform offset density is
// replaced by an empirical histogram f(r̂_d) and every term is integrated bin
// by bin.

#include <algorithm>
#include <cmath>
#include <vector>

#include "analytic.hpp"
#include "geometry.hpp"
#include "histogram.hpp"
#include "quadrature.hpp"
#include "travel_kernels.hpp"

namespace hofail::semi_analytic {

inline QuadratureSpec default_quadrature() { return {1e-9, 4000}; }

namespace detail {

/// Σ_i f_i ∫_{bin_i ∩ [lo, hi]} g(r) dr, with interior kinks passed to the integrator.
template <class G>
double weighted_integral(const Histogram& h, double lo, double hi, const G& g,
                         const std::vector<double>& breaks, const QuadratureSpec& quad)
{
    const auto& e = h.edges();
    const auto& d = h.density();
    double total = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        if (d[i] == 0.0)
            continue;
        const double a = std::max(lo, e[i]);
        const double b = std::min(hi, e[i + 1]);
        if (!(b > a))
            continue;
        QuadratureSpec bin_quad = quad;
        bin_quad.abs_tol = quad.abs_tol / (d[i] * static_cast<double>(h.bins()));
        total += d[i] * integrate_piecewise(g, a, b, breaks, bin_quad);
    }
    return total;
}

/// Histogram mass on [lo, hi].
inline double mass_between(const Histogram& h, double lo, double hi)
{
    if (!(hi > lo))
        return 0.0;
    return h.cdf(hi) - h.cdf(lo);
}

}  // namespace detail

/// MUE HF probability, split into the regions where the HF chord bound is
/// unreachable (r̂ < R−r_m−υT_m), active (up to √(R²−r_m²)−υT_m) and saturated.
inline double mue_hf_empirical(const CellGeometry& g, const MobilityConfig& m, const Histogram& f_rd,
                               const QuadratureSpec& quad = default_quadrature())
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double s = g.mue_half_chord();
    const double vtm = m.macro_travel();
    const double lo = f_rd.support_min();
    const double hi = f_rd.support_max();
    const double unreachable_end = R - rm - vtm;
    const double saturated_start = s - vtm;

    const double mass_unreachable = detail::mass_between(f_rd, lo, std::min(hi, unreachable_end));
    const double mass_saturated = detail::mass_between(f_rd, std::max(lo, saturated_start), hi);
    const auto i1 = [&](double rd) { return analytic::detail::i1(g, vtm + rd); };
    const double active = detail::weighted_integral(f_rd, std::max(lo, unreachable_end),
                                                    std::min(hi, saturated_start), i1, {}, quad);
    const double p = 1.0 - mass_unreachable - 2.0 / kPi * active
                     - 2.0 / kPi * std::atan(s / rm) * mass_saturated;
    return std::clamp(p, 0.0, 1.0);
}

/// PUE HF probability P(L̂_p < l(θ) < L̂_m) averaged over f(r̂_d), with the same
/// offset on both legs.
inline double pue_hf_empirical(const CellGeometry& g, const MobilityConfig& m, const Histogram& f_rd,
                               const QuadratureSpec& quad = default_quadrature())
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double rp = g.pue_hf_radius();
    const double s = g.mue_half_chord();
    const double vtm = m.macro_travel();
    const double vtp = m.pico_travel();

    std::vector<double> breaks{-vtm,           -vtp,          R - rm - vtm, s - vtm,
                               2.0 * s - vtm,  rp - R - vtp,  2.0 * R - vtm};
    breaks.push_back(analytic::crossover_root(g, m));
    const auto window = [&](double rd) { return kernel::pue_hf_given_travel(g, vtm + rd, vtp + rd); };
    const double p = detail::weighted_integral(f_rd, f_rd.support_min(), f_rd.support_max(), window,
                                               breaks, quad);
    return std::clamp(p, 0.0, 1.0);
}

/// No-handover probability over f(r̂_d); offsets with υT_m + r̂_d ≤ 0 never leave before TTT expiry.
inline double nho_empirical(const CellGeometry& g, const MobilityConfig& m, const Histogram& f_rd,
                            const QuadratureSpec& quad = default_quadrature())
{
    const double vtm = m.macro_travel();
    const double s = g.mue_half_chord();
    const auto nho = [&](double rd) { return kernel::nho_given_travel(g, vtm + rd); };
    const double p = detail::weighted_integral(f_rd, f_rd.support_min(), f_rd.support_max(), nho,
                                               {-vtm, 2.0 * s - vtm}, quad);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace hofail::semi_analytic
