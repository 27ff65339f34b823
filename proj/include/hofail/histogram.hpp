#pragma once

// Piecewise-constant densities over explicit bin edges, and the handover
// offset distributions built on them.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hofail {

/// Normalized binned density. edges has n+1 strictly increasing entries (m),
/// density has n nonnegative entries (1/m) with total mass 1 within 1e-9.
class Histogram {
public:
    Histogram(std::vector<double> edges, std::vector<double> density)
        : edges_(std::move(edges)), density_(std::move(density))
    {
        if (edges_.size() < 2 || density_.size() + 1 != edges_.size())
            throw std::invalid_argument("Histogram: need n+1 edges for n densities, n >= 1");
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
            if (!(std::isfinite(edges_[i]) && std::isfinite(edges_[i + 1]) && edges_[i] < edges_[i + 1]))
                throw std::invalid_argument("Histogram: edges must be finite and strictly increasing");
        }
        for (double d : density_) {
            if (!(std::isfinite(d) && d >= 0.0))
                throw std::invalid_argument("Histogram: densities must be finite and nonnegative");
        }
        if (std::abs(total_mass() - 1.0) > 1e-9)
            throw std::invalid_argument("Histogram: density does not integrate to 1");
        build_cdf();
    }

    /// Normalizes nonnegative per-bin weights (counts or masses) into a density.
    static Histogram from_weights(std::vector<double> edges, const std::vector<double>& weights)
    {
        if (edges.size() != weights.size() + 1 || weights.empty())
            throw std::invalid_argument("Histogram::from_weights: need n+1 edges for n weights");
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (!(total > 0.0))
            throw std::invalid_argument("Histogram::from_weights: total weight must be positive");
        std::vector<double> density(weights.size());
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] < 0.0)
                throw std::invalid_argument("Histogram::from_weights: negative weight");
            density[i] = weights[i] / (total * (edges[i + 1] - edges[i]));
        }
        return Histogram(std::move(edges), std::move(density));
    }

    /// Equal-width binning of raw samples over [min, max]. A degenerate sample
    /// set (all values equal) becomes one narrow bin centred on the value.
    static Histogram from_samples(const std::vector<double>& samples, std::size_t bins,
                                  double degenerate_width = 1e-6)
    {
        if (samples.empty())
            throw std::invalid_argument("Histogram::from_samples: no samples");
        if (bins == 0)
            throw std::invalid_argument("Histogram::from_samples: bins must be >= 1");
        const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        if (!(hi - lo > degenerate_width)) {
            const double mid = 0.5 * (lo + hi);
            return Histogram({mid - 0.5 * degenerate_width, mid + 0.5 * degenerate_width},
                             {1.0 / degenerate_width});
        }
        std::vector<double> edges(bins + 1);
        for (std::size_t i = 0; i <= bins; ++i)
            edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
        edges.back() = hi;
        std::vector<double> counts(bins, 0.0);
        const double width = (hi - lo) / static_cast<double>(bins);
        for (double s : samples) {
            auto idx = static_cast<std::size_t>((s - lo) / width);
            counts[std::min(idx, bins - 1)] += 1.0;
        }
        return from_weights(std::move(edges), counts);
    }

    /// Single bin of unit mass on [lo, hi].
    static Histogram uniform(double lo, double hi)
    {
        if (!(hi > lo))
            throw std::invalid_argument("Histogram::uniform: need hi > lo");
        return Histogram({lo, hi}, {1.0 / (hi - lo)});
    }

    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& density() const { return density_; }
    std::size_t bins() const { return density_.size(); }
    double support_min() const { return edges_.front(); }
    double support_max() const { return edges_.back(); }
    double bin_mass(std::size_t i) const { return density_[i] * (edges_[i + 1] - edges_[i]); }

    double total_mass() const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < density_.size(); ++i)
            m += bin_mass(i);
        return m;
    }

    /// Piecewise-linear CDF.
    double cdf(double x) const
    {
        if (x <= edges_.front())
            return 0.0;
        if (x >= edges_.back())
            return 1.0;
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        const auto i = static_cast<std::size_t>(it - edges_.begin()) - 1;
        return cum_[i] + density_[i] * (x - edges_[i]) / total_;
    }

    /// Inverse CDF with linear interpolation inside the bin, u in [0, 1].
    double quantile(double u) const
    {
        u = std::clamp(u, 0.0, 1.0);
        // First bin whose upper cumulative value reaches u, skipping empty bins.
        auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), u);
        if (it == cum_.end())
            it = cum_.end() - 1;
        auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
        while (i + 1 < density_.size() && density_[i] == 0.0)
            ++i;
        if (density_[i] == 0.0)
            return edges_.back();
        const double x = edges_[i] + (u - cum_[i]) * total_ / density_[i];
        return std::clamp(x, edges_[i], edges_[i + 1]);
    }

    double mean() const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < bins(); ++i)
            m += bin_mass(i) * 0.5 * (edges_[i] + edges_[i + 1]);
        return m / total_;
    }

    /// Copy translated by delta metres.
    Histogram shifted(double delta) const
    {
        std::vector<double> e = edges_;
        for (double& x : e)
            x += delta;
        return Histogram(std::move(e), density_);
    }

    bool operator==(const Histogram& o) const { return edges_ == o.edges_ && density_ == o.density_; }

private:
    void build_cdf()
    {
        cum_.assign(edges_.size(), 0.0);
        for (std::size_t i = 0; i < density_.size(); ++i)
            cum_[i + 1] = cum_[i] + bin_mass(i);
        total_ = cum_.back();
        for (double& c : cum_)
            c /= total_;
        cum_.back() = 1.0;
    }

    std::vector<double> edges_;
    std::vector<double> density_;
    std::vector<double> cum_;
    double total_ = 1.0;
};

// JSON contract: {"edges":[...], "density":[...]}.
inline nlohmann::json to_json(const Histogram& h)
{
    return nlohmann::json{{"edges", h.edges()}, {"density", h.density()}};
}

inline Histogram histogram_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("edges") || !j.contains("density"))
        throw std::invalid_argument("histogram JSON must have 'edges' and 'density'");
    return Histogram(j.at("edges").get<std::vector<double>>(), j.at("density").get<std::vector<double>>());
}

inline void save_histogram(const Histogram& h, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json(h).dump() << '\n';
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

inline Histogram load_histogram(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("histogram file not found: '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed histogram JSON in '" + path + "': " + e.what());
    }
    return histogram_from_json(j);
}

// ---------------------------------------------------------------------------

/// r_d ~ U[0, width) with width = υT_d.
struct UniformOffset {
    double width;
};

/// r̂_d drawn from an empirical histogram; support may include negative values.
struct EmpiricalOffset {
    Histogram hist;
};

/// Distribution of the handover offset distance (m, positive = past the boundary).
class OffsetDistribution {
public:
    static OffsetDistribution uniform(double width)
    {
        if (!(std::isfinite(width) && width >= 0.0))
            throw std::invalid_argument("OffsetDistribution::uniform: width must be >= 0");
        return OffsetDistribution(UniformOffset{width});
    }
    static OffsetDistribution empirical(Histogram h) { return OffsetDistribution(EmpiricalOffset{std::move(h)}); }

    bool is_uniform() const { return std::holds_alternative<UniformOffset>(v_); }
    const UniformOffset* as_uniform() const { return std::get_if<UniformOffset>(&v_); }
    const EmpiricalOffset* as_empirical() const { return std::get_if<EmpiricalOffset>(&v_); }

    double support_min() const
    {
        if (is_uniform())
            return 0.0;
        return as_empirical()->hist.support_min();
    }
    double support_max() const
    {
        if (auto u = as_uniform())
            return u->width;
        return as_empirical()->hist.support_max();
    }

    template <class Rng>
    double sample(Rng& rng) const
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double u = unit(rng);
        if (auto uo = as_uniform())
            return uo->width * u;
        return as_empirical()->hist.quantile(u);
    }

private:
    explicit OffsetDistribution(std::variant<UniformOffset, EmpiricalOffset> v) : v_(std::move(v)) {}
    std::variant<UniformOffset, EmpiricalOffset> v_;
};

template <class Rng>
double sample_offset(const OffsetDistribution& dist, Rng& rng)
{
    return dist.sample(rng);
}

}  // namespace hofail
