#pragma once

// Closed-form and quadrature-backed probabilities for the no-fading model,
// where the handover offset is uniform on [0, υT_d) and the same offset is
// used on the macro->pico and pico->macro legs.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "quadrature.hpp"
#include "travel_kernels.hpp"

namespace hofail::analytic {

enum class ProbabilityKind { NoHandover, MueHF, PueHF };

inline std::string to_string(ProbabilityKind k)
{
    switch (k) {
    case ProbabilityKind::NoHandover: return "nho";
    case ProbabilityKind::MueHF: return "mue_hf";
    case ProbabilityKind::PueHF: return "pue_hf";
    }
    return "?";
}

struct RegimeLabel {
    ProbabilityKind kind;
    int case_index;
    bool operator==(const RegimeLabel&) const = default;
};

/// Case partition, ordered by increasing travel. With s = √(R²−r_m²):
///   NHO:    1: υT_m+υT_d ≤ 2s            2: υT_m < 2s < υT_m+υT_d   3: υT_m ≥ 2s
///   MUE HF: 1: υT_m+υT_d ≤ R−r_m         2: ≤ s    3: υT_m ≤ 2s     4: otherwise
///   PUE HF: 1: υT_m+υT_d ≤ s             2: ≤ 2s   3: otherwise
inline RegimeLabel classify_regime(ProbabilityKind kind, const CellGeometry& g, const MobilityConfig& m)
{
    const double vtm = m.macro_travel();
    const double reach = vtm + m.sampling_travel();
    const double s = g.mue_half_chord();
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    switch (kind) {
    case ProbabilityKind::NoHandover:
        if (reach <= 2.0 * s)
            return {kind, 1};
        return {kind, vtm < 2.0 * s ? 2 : 3};
    case ProbabilityKind::MueHF:
        if (reach <= R - rm)
            return {kind, 1};
        if (reach <= s)
            return {kind, 2};
        return {kind, vtm <= 2.0 * s ? 3 : 4};
    case ProbabilityKind::PueHF:
        if (reach <= s)
            return {kind, 1};
        return {kind, reach <= 2.0 * s ? 2 : 3};
    }
    return {kind, 0};
}

/// Where the crossover offset falls relative to the offset support.
enum class CrossoverPosition { Inside, BelowSupport, AboveSupport };

struct Crossover {
    CrossoverPosition position;
    /// Offset r_d at which d_vm = υT_m + r_d equals d_rp = (r_p²−R²)/(υT_p+r_d) − (υT_p+r_d).
    double offset;
};

/// Offset where the macro-travel bound overtakes the PUE-HF chord bound. The
/// crossing is unique on r_d > −υT_p because d_vm increases and d_rp decreases
/// there; it is the larger root of
///   2 r² + (υT_m + 3υT_p) r + υT_p(υT_m + υT_p) − (r_p² − R²) = 0.
inline double crossover_root(const CellGeometry& g, const MobilityConfig& m)
{
    const double a = m.macro_travel();
    const double p = m.pico_travel();
    const double b = a + 3.0 * p;
    const double c = p * (a + p) - g.pue_gap_sq();
    const double disc = (a - p) * (a - p) + 8.0 * g.pue_gap_sq();
    const double root_disc = std::sqrt(disc);
    // Cancellation-free form of (−b + √disc) / 4.
    if (b > 0.0)
        return -2.0 * c / (b + root_disc);
    return (-b + root_disc) / 4.0;
}

inline Crossover crossover_offset(const CellGeometry& g, const MobilityConfig& m, double support_lo,
                                  double support_hi)
{
    const double r = crossover_root(g, m);
    if (r < support_lo)
        return {CrossoverPosition::BelowSupport, r};
    if (r > support_hi)
        return {CrossoverPosition::AboveSupport, r};
    return {CrossoverPosition::Inside, r};
}

inline Crossover crossover_offset(const CellGeometry& g, const MobilityConfig& m)
{
    return crossover_offset(g, m, 0.0, m.sampling_travel());
}

namespace detail {

// Below this offset-support width the uniform density is treated as a point mass.
inline constexpr double kDegenerateWidth = 1e-6;

inline QuadratureSpec default_quadrature() { return {1e-9, 4000}; }

/// ∫ (2/π) asin(u/2R) du.
inline double nho_antiderivative(double u, double R)
{
    return 2.0 / kPi * (u * std::asin(u / (2.0 * R)) + std::sqrt(std::max(0.0, 4.0 * R * R - u * u)));
}

/// arcsin(d_rm / 2R) written as the arctangent I₁(r_d), with the region where
/// d_rm ≥ 2R mapped to π/2 and the saturated region to atan(s / r_m).
inline double i1(const CellGeometry& g, double x)
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double s = g.mue_half_chord();
    if (x <= R - rm)
        return kPi / 2.0;
    if (x >= s)
        return std::atan(s / rm);
    const double K = g.mue_gap_sq();
    const double num = K + x * x;
    const double rad = 4.0 * R * R * x * x - num * num;
    if (rad <= 0.0)
        return kPi / 2.0;
    return std::atan(num / std::sqrt(rad));
}

}  // namespace detail

inline double nho_probability(const CellGeometry& g, const MobilityConfig& m)
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double s = g.mue_half_chord();
    const double vtm = m.macro_travel();
    const double vtd = m.sampling_travel();
    const double saturated = 2.0 / kPi * std::atan(s / rm);
    if (vtd < detail::kDegenerateWidth)
        return kernel::nho_given_travel(g, vtm + 0.5 * vtd);

    switch (classify_regime(ProbabilityKind::NoHandover, g, m).case_index) {
    case 1:
        return (detail::nho_antiderivative(vtm + vtd, R) - detail::nho_antiderivative(vtm, R)) / vtd;
    case 2: {
        // Offsets beyond 2s − υT_m leave the probability at its saturated value.
        const double head = 2.0 * rm * 2.0 / kPi + 2.0 * s * saturated - detail::nho_antiderivative(vtm, R);
        const double tail = (vtm + vtd - 2.0 * s) * saturated;
        return std::clamp((head + tail) / vtd, 0.0, 1.0);
    }
    default:
        return saturated;
    }
}

inline double mue_hf_probability(const CellGeometry& g, const MobilityConfig& m,
                                 const QuadratureSpec& quad = detail::default_quadrature())
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double s = g.mue_half_chord();
    const double vtm = m.macro_travel();
    const double vtd = m.sampling_travel();
    if (vtd < detail::kDegenerateWidth)
        return kernel::mue_hf_given_travel(g, vtm + 0.5 * vtd);

    switch (classify_regime(ProbabilityKind::MueHF, g, m).case_index) {
    case 1:
        return 0.0;
    case 2:
    case 3: {
        const auto integrand = [&](double rd) { return 2.0 / kPi * detail::i1(g, vtm + rd); };
        const double area = integrate_piecewise(integrand, 0.0, vtd, {R - rm - vtm, s - vtm}, quad);
        return std::clamp(1.0 - area / vtd, 0.0, 1.0);
    }
    default:
        return 1.0 - 2.0 / kPi * std::atan(s / rm);
    }
}

inline double pue_hf_probability(const CellGeometry& g, const MobilityConfig& m,
                                 const QuadratureSpec& quad = detail::default_quadrature())
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double rp = g.pue_hf_radius();
    const double s = g.mue_half_chord();
    const double vtm = m.macro_travel();
    const double vtp = m.pico_travel();
    const double vtd = m.sampling_travel();
    if (vtd < detail::kDegenerateWidth)
        return kernel::pue_hf_given_travel(g, vtm + 0.5 * vtd, vtp + 0.5 * vtd);

    const int regime = classify_regime(ProbabilityKind::PueHF, g, m).case_index;
    const auto integrand = [&](double rd) {
        const double d_vm = vtm + rd;
        const double y = vtp + rd;
        if (!(y > 0.0) || !(d_vm > 0.0))
            return kernel::pue_hf_given_travel(g, d_vm, y);
        const double d_rp = g.pue_gap_sq() / y - y;
        const double d_rm = g.mue_gap_sq() / d_vm + d_vm;
        const double lower = std::max(d_vm, d_rp);
        // Past d_vm = s every chord through the r_m circle fails, so only chords
        // shorter than 2s survive the inbound leg.
        const double upper = (regime == 1 || d_vm < s) ? std::min(d_rm, 2.0 * R) : 2.0 * s;
        return kernel::chord_window(lower, upper, R);
    };
    std::vector<double> breaks{R - rm - vtm, s - vtm, rp - R - vtp};
    if (const auto lp = crossover_offset(g, m); lp.position == CrossoverPosition::Inside)
        breaks.push_back(lp.offset);
    const double area = integrate_piecewise(integrand, 0.0, vtd, breaks, quad);
    return std::clamp(area / vtd, 0.0, 1.0);
}

inline double probability(ProbabilityKind kind, const CellGeometry& g, const MobilityConfig& m)
{
    switch (kind) {
    case ProbabilityKind::NoHandover: return nho_probability(g, m);
    case ProbabilityKind::MueHF: return mue_hf_probability(g, m);
    case ProbabilityKind::PueHF: return pue_hf_probability(g, m);
    }
    return 0.0;
}

}  // namespace hofail::analytic
