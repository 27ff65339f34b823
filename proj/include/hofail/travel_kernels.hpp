#pragma once

// Event probabilities over the chord angle θ (endpoint-angle chord model) for
// a fixed effective travel distance. `x` is the distance covered between the
// picocell boundary and macro->pico TTT expiry (υT_m + r_d); `y` is the same
// for the pico->macro leg (υT_p + r_d). Everything downstream integrates these
// functions against an offset density.

#include <algorithm>
#include <cmath>

#include "geometry.hpp"

namespace hofail::kernel {

/// P(l(θ) ≤ l) for the endpoint-angle chord model.
inline double chord_cdf1(double l, double R)
{
    return 2.0 / kPi * std::asin(std::clamp(l / (2.0 * R), 0.0, 1.0));
}

/// P(lo < l(θ) < hi), zero for an empty window.
inline double chord_window(double lo, double hi, double R)
{
    if (!(hi > lo))
        return 0.0;
    return std::max(0.0, chord_cdf1(hi, R) - chord_cdf1(lo, R));
}

/// Shortest chord that reaches the MUE-HF circle within travel x (d_rm).
inline double mue_hf_chord_threshold(const CellGeometry& g, double x)
{
    return g.mue_gap_sq() / x + x;
}

/// Shortest chord for which travel y past the exit reaches the PUE-HF circle (d_rp).
inline double pue_hf_chord_threshold(const CellGeometry& g, double y)
{
    return g.pue_gap_sq() / y - y;
}

/// P(MUE HF | x). Zero for x ≤ 0; saturates at P(chord meets the r_m circle) once x ≥ √(R²−r_m²).
inline double mue_hf_given_travel(const CellGeometry& g, double x)
{
    if (!(x > 0.0))
        return 0.0;
    const double R = g.coverage_radius();
    const double s = g.mue_half_chord();
    if (x >= s)
        return 1.0 - chord_cdf1(2.0 * s, R);
    return 1.0 - chord_cdf1(mue_hf_chord_threshold(g, x), R);
}

/// P(no handover | x): the chord is shorter than x and misses the r_m circle.
inline double nho_given_travel(const CellGeometry& g, double x)
{
    if (!(x > 0.0))
        return 0.0;
    return chord_cdf1(std::min(x, 2.0 * g.mue_half_chord()), g.coverage_radius());
}

/// Longest chord on which the macro->pico handover still succeeds for travel x.
inline double inbound_success_upper(const CellGeometry& g, double x)
{
    const double R = g.coverage_radius();
    if (!(x > 0.0))
        return 2.0 * R;
    const double s = g.mue_half_chord();
    if (x < s)
        return std::min(mue_hf_chord_threshold(g, x), 2.0 * R);
    return 2.0 * s;
}

/// P(macro->pico handover succeeds | x).
inline double inbound_success_given_travel(const CellGeometry& g, double x)
{
    return chord_window(std::max(x, 0.0), inbound_success_upper(g, x), g.coverage_radius());
}

/// P(inbound success and PUE HF | x, y).
inline double pue_hf_given_travel(const CellGeometry& g, double x, double y)
{
    if (!(y > 0.0))
        return 0.0;
    const double lo = std::max({x, pue_hf_chord_threshold(g, y), 0.0});
    return chord_window(lo, inbound_success_upper(g, x), g.coverage_radius());
}

}  // namespace hofail::kernel
