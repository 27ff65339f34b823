#pragma once

// Concentric-circle handover geometry: cell radii, mobility timers, chord
// length distributions and the distance from the picocell boundary to the
// two handover-failure circles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace hofail {

inline constexpr double kPi = std::numbers::pi;

/// Picocell coverage radius R, MUE-HF radius r_m and PUE-HF radius r_p (m).
/// Always satisfies 0 < r_m < R < r_p.
class CellGeometry {
public:
    CellGeometry(double coverage_radius, double mue_hf_radius, double pue_hf_radius)
        : R_(coverage_radius), rm_(mue_hf_radius), rp_(pue_hf_radius)
    {
        if (!(std::isfinite(R_) && std::isfinite(rm_) && std::isfinite(rp_)))
            throw std::invalid_argument("CellGeometry: radii must be finite");
        if (!(rm_ > 0.0 && rm_ < R_ && R_ < rp_))
            throw std::invalid_argument("CellGeometry: require 0 < r_m < R < r_p");
    }

    /// R=64 m, r_m=50 m, r_p=78 m.
    static CellGeometry reference() { return {64.0, 50.0, 78.0}; }

    double coverage_radius() const { return R_; }
    double mue_hf_radius() const { return rm_; }
    double pue_hf_radius() const { return rp_; }

    /// R² − r_m²; its square root is the half-chord of a chord tangent to the MUE-HF circle.
    double mue_gap_sq() const { return R_ * R_ - rm_ * rm_; }
    double mue_half_chord() const { return std::sqrt(mue_gap_sq()); }
    /// r_p² − R².
    double pue_gap_sq() const { return rp_ * rp_ - R_ * R_; }

    bool operator==(const CellGeometry&) const = default;

private:
    double R_;
    double rm_;
    double rp_;
};

/// UE speed (m/s) with the macro/pico time-to-trigger and the L3 sampling period (s).
class MobilityConfig {
public:
    MobilityConfig(double speed, double ttt_macro, double ttt_pico, double sampling_period)
        : v_(speed), tm_(ttt_macro), tp_(ttt_pico), td_(sampling_period)
    {
        if (!(std::isfinite(v_) && v_ >= 0.0))
            throw std::invalid_argument("MobilityConfig: speed must be finite and >= 0");
        if (!(tm_ > 0.0 && tp_ > 0.0 && td_ > 0.0)
            || !(std::isfinite(tm_) && std::isfinite(tp_) && std::isfinite(td_)))
            throw std::invalid_argument("MobilityConfig: durations must be finite and > 0");
    }

    static MobilityConfig from_kmh_ms(double speed_kmh, double ttt_macro_ms, double ttt_pico_ms,
                                      double sampling_ms)
    {
        return {speed_kmh / 3.6, ttt_macro_ms * 1e-3, ttt_pico_ms * 1e-3, sampling_ms * 1e-3};
    }

    double speed() const { return v_; }
    double ttt_macro() const { return tm_; }
    double ttt_pico() const { return tp_; }
    double sampling_period() const { return td_; }

    // Distances covered during each timer (m).
    double macro_travel() const { return v_ * tm_; }
    double pico_travel() const { return v_ * tp_; }
    double sampling_travel() const { return v_ * td_; }

    MobilityConfig with_speed(double speed) const { return {speed, tm_, tp_, td_}; }
    MobilityConfig with_sampling_period(double td) const { return {v_, tm_, tp_, td}; }

private:
    double v_;
    double tm_;
    double tp_;
    double td_;
};

// ---------------------------------------------------------------------------
// Chord length distributions (Bertrand's three random-chord constructions).

enum class ChordModel {
    EndpointAngle,      // endpoint fixed, angle to the radius uniform
    PerpendicularFoot,  // distance from chord to centre uniform
    Midpoint,           // midpoint uniform on the disk
};

inline std::string to_string(ChordModel m)
{
    switch (m) {
    case ChordModel::EndpointAngle: return "endpoint-angle";
    case ChordModel::PerpendicularFoot: return "perpendicular-foot";
    case ChordModel::Midpoint: return "midpoint";
    }
    return "?";
}

/// Chord length density on [0, 2R]. Models 1 and 2 diverge at l = 2R and
/// return +infinity there; integrate them in the angle domain instead.
inline double chord_pdf(ChordModel model, double l, double R)
{
    if (!(R > 0.0))
        throw std::domain_error("chord_pdf: R must be positive");
    if (!(l >= 0.0 && l <= 2.0 * R))
        throw std::domain_error("chord_pdf: l outside [0, 2R]");
    const double rad_sq = 4.0 * R * R - l * l;
    switch (model) {
    case ChordModel::EndpointAngle:
        if (rad_sq <= 0.0)
            return std::numeric_limits<double>::infinity();
        return 2.0 / (kPi * std::sqrt(rad_sq));
    case ChordModel::PerpendicularFoot:
        if (rad_sq <= 0.0)
            return std::numeric_limits<double>::infinity();
        return l / (2.0 * R * std::sqrt(rad_sq));
    case ChordModel::Midpoint:
        return l / (2.0 * R * R);
    }
    return 0.0;
}

/// P(chord length ≤ l); l is clamped to [0, 2R].
inline double chord_cdf(ChordModel model, double l, double R)
{
    if (!(R > 0.0))
        throw std::domain_error("chord_cdf: R must be positive");
    const double u = std::clamp(l / (2.0 * R), 0.0, 1.0);
    switch (model) {
    case ChordModel::EndpointAngle: return 2.0 / kPi * std::asin(u);
    case ChordModel::PerpendicularFoot: return 1.0 - std::sqrt(1.0 - u * u);
    case ChordModel::Midpoint: return u * u;
    }
    return 0.0;
}

/// Chord length l(θ) = 2R cos θ for a trajectory entering at angle θ to the radius.
inline double chord_length(double R, double theta) { return 2.0 * R * std::cos(theta); }

template <class Rng>
double sample_chord(ChordModel model, double R, Rng& rng)
{
    if (!(R > 0.0))
        throw std::domain_error("sample_chord: R must be positive");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (model) {
    case ChordModel::EndpointAngle: {
        const double theta = kPi * (unit(rng) - 0.5);
        return chord_length(R, theta);
    }
    case ChordModel::PerpendicularFoot: {
        const double r = R * unit(rng);
        return 2.0 * std::sqrt(std::max(0.0, R * R - r * r));
    }
    case ChordModel::Midpoint: {
        const double rho = R * std::sqrt(unit(rng));
        return 2.0 * std::sqrt(std::max(0.0, R * R - rho * rho));
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Distances along the chord.

/// Distance from the picocell entry point to the MUE-HF circle along a
/// trajectory at angle θ; std::nullopt when the trajectory misses the circle.
inline std::optional<double> dist_to_mue_hf(const CellGeometry& g, double theta)
{
    const double R = g.coverage_radius();
    const double rm = g.mue_hf_radius();
    const double offset = R * std::abs(std::sin(theta));
    if (offset > rm)
        return std::nullopt;
    const double rad = std::max(0.0, rm * rm - offset * offset);
    return R * std::cos(theta) - std::sqrt(rad);
}

/// Distance from the picocell exit point to the PUE-HF circle, continuing
/// along the trajectory. Always positive since r_p > R.
inline double dist_to_pue_hf(const CellGeometry& g, double theta)
{
    const double R = g.coverage_radius();
    const double rp = g.pue_hf_radius();
    const double offset = R * std::sin(theta);
    return std::sqrt(rp * rp - offset * offset) - R * std::cos(theta);
}

}  // namespace hofail
