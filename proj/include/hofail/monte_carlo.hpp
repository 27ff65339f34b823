#pragma once

// Trial-level simulation of the concentric-circle model: draw an entry angle
// and handover offsets, walk the chord, and classify the outcome.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "geometry.hpp"
#include "histogram.hpp"

namespace hofail::mc {

enum class OutcomeKind : int {
    NoHandover = 0,
    MueHandoverFailure,
    HandoverSuccess,
    PueHandoverFailure,
    PingPong,
};
inline constexpr std::size_t kOutcomeKinds = 5;

inline std::string to_string(OutcomeKind k)
{
    switch (k) {
    case OutcomeKind::NoHandover: return "no_handover";
    case OutcomeKind::MueHandoverFailure: return "mue_hf";
    case OutcomeKind::HandoverSuccess: return "success";
    case OutcomeKind::PueHandoverFailure: return "pue_hf";
    case OutcomeKind::PingPong: return "ping_pong";
    }
    return "?";
}

struct TrialOutcome {
    OutcomeKind kind;
    double theta;
    double offset_in;
    double offset_out;
    /// Present once the UE is served by the picocell and the outbound handover succeeded.
    std::optional<double> time_of_stay;
};

/// Whether the pico->macro leg reuses the macro->pico offset or draws a fresh one.
enum class OffsetMode { Independent, Shared };

/// Offset distributions for the two legs.
struct OffsetModel {
    OffsetDistribution inbound;
    OffsetDistribution outbound;
    OffsetMode mode = OffsetMode::Independent;

    /// Uniform [0, υT_d) on both legs.
    static OffsetModel uniform(const MobilityConfig& m, OffsetMode mode = OffsetMode::Independent)
    {
        auto d = OffsetDistribution::uniform(m.sampling_travel());
        return {d, d, mode};
    }
    static OffsetModel empirical(const Histogram& h, OffsetMode mode = OffsetMode::Independent)
    {
        auto d = OffsetDistribution::empirical(h);
        return {d, d, mode};
    }
};

/// Classifies one trajectory with a given entry angle and offsets.
inline TrialOutcome classify_trial(const CellGeometry& g, const MobilityConfig& m, double theta,
                                   double offset_in, double offset_out, double ping_pong_threshold)
{
    const double chord = chord_length(g.coverage_radius(), theta);
    const double travel_in = m.macro_travel() + offset_in;
    if (const auto hf = dist_to_mue_hf(g, theta); hf && travel_in >= *hf)
        return {OutcomeKind::MueHandoverFailure, theta, offset_in, offset_out, std::nullopt};
    if (travel_in >= chord)
        return {OutcomeKind::NoHandover, theta, offset_in, offset_out, std::nullopt};

    const double travel_out = m.pico_travel() + offset_out;
    if (travel_out >= dist_to_pue_hf(g, theta))
        return {OutcomeKind::PueHandoverFailure, theta, offset_in, offset_out, std::nullopt};

    const double path = std::max(0.0, chord - travel_in + travel_out);
    const double stay = m.speed() > 0.0 ? path / m.speed() : std::numeric_limits<double>::infinity();
    const auto kind = stay < ping_pong_threshold ? OutcomeKind::PingPong : OutcomeKind::HandoverSuccess;
    return {kind, theta, offset_in, offset_out, stay};
}

template <class Rng>
TrialOutcome run_trial(const CellGeometry& g, const MobilityConfig& m, const OffsetModel& offsets,
                       double ping_pong_threshold, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double theta = kPi * (unit(rng) - 0.5);
    const double r_in = offsets.inbound.sample(rng);
    const double r_out = offsets.mode == OffsetMode::Shared ? r_in : offsets.outbound.sample(rng);
    return classify_trial(g, m, theta, r_in, r_out, ping_pong_threshold);
}

struct OutcomeCounts {
    std::uint64_t trials = 0;
    std::array<std::uint64_t, kOutcomeKinds> by_kind{};

    std::uint64_t operator[](OutcomeKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
    /// Trials whose macro->pico handover succeeded.
    std::uint64_t inbound_successes() const
    {
        return (*this)[OutcomeKind::HandoverSuccess] + (*this)[OutcomeKind::PueHandoverFailure]
               + (*this)[OutcomeKind::PingPong];
    }
    OutcomeCounts& operator+=(const OutcomeCounts& o)
    {
        trials += o.trials;
        for (std::size_t i = 0; i < kOutcomeKinds; ++i)
            by_kind[i] += o.by_kind[i];
        return *this;
    }
    bool operator==(const OutcomeCounts&) const = default;
};

struct EstimateWithCI {
    double p_hat;
    std::uint64_t n_trials;
    double half_width_95;

    static EstimateWithCI from_counts(std::uint64_t hits, std::uint64_t n)
    {
        if (n == 0)
            return {0.0, 0, 0.0};
        const double p = static_cast<double>(hits) / static_cast<double>(n);
        return {p, n, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
    }
};

struct RunOptions {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    double ping_pong_threshold = 1.0;  // s
    /// 0 = hardware concurrency. Results do not depend on this value.
    unsigned workers = 0;
};

inline constexpr std::uint64_t kMinTrials = 10'000;
inline constexpr std::uint64_t kChunkTrials = 1u << 16;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of the random stream for trial chunk `chunk`.
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(chunk + 0x632BE59BD9B4E019ull));
}

}  // namespace detail

/// Runs `opts.trials` trials split into fixed-size chunks, each with its own
/// derived stream, so the counts depend only on (seed, trials) and not on the
/// number of workers.
inline OutcomeCounts simulate(const CellGeometry& g, const MobilityConfig& m, const OffsetModel& offsets,
                              const RunOptions& opts)
{
    if (!(opts.ping_pong_threshold >= 0.0))
        throw std::invalid_argument("simulate: ping-pong threshold must be >= 0");
    const std::uint64_t chunks = (opts.trials + kChunkTrials - 1) / kChunkTrials;
    unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(chunks, 1)));

    std::vector<OutcomeCounts> partial(workers);
    const auto work = [&](unsigned w) {
        for (std::uint64_t c = w; c < chunks; c += workers) {
            std::mt19937_64 rng(detail::chunk_seed(opts.seed, c));
            const std::uint64_t begin = c * kChunkTrials;
            const std::uint64_t end = std::min(opts.trials, begin + kChunkTrials);
            OutcomeCounts local;
            for (std::uint64_t t = begin; t < end; ++t) {
                const auto out = run_trial(g, m, offsets, opts.ping_pong_threshold, rng);
                ++local.by_kind[static_cast<std::size_t>(out.kind)];
            }
            local.trials = end - begin;
            partial[w] += local;
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work, w);
    }
    OutcomeCounts total;
    for (const auto& p : partial)
        total += p;
    return total;
}

enum class Metric { NoHandover, MueHF, PueHF, PueHFGivenSuccess, PingPong };

inline EstimateWithCI estimate_from_counts(Metric metric, const OutcomeCounts& c)
{
    switch (metric) {
    case Metric::NoHandover: return EstimateWithCI::from_counts(c[OutcomeKind::NoHandover], c.trials);
    case Metric::MueHF: return EstimateWithCI::from_counts(c[OutcomeKind::MueHandoverFailure], c.trials);
    case Metric::PueHF: return EstimateWithCI::from_counts(c[OutcomeKind::PueHandoverFailure], c.trials);
    case Metric::PueHFGivenSuccess:
        return EstimateWithCI::from_counts(c[OutcomeKind::PueHandoverFailure], c.inbound_successes());
    case Metric::PingPong: return EstimateWithCI::from_counts(c[OutcomeKind::PingPong], c.trials);
    }
    return {0.0, 0, 0.0};
}

/// Monte Carlo estimate of one metric; deterministic for a given seed.
inline EstimateWithCI estimate(Metric metric, const CellGeometry& g, const MobilityConfig& m,
                               const OffsetModel& offsets, const RunOptions& opts)
{
    if (opts.trials < kMinTrials)
        throw std::invalid_argument("estimate: need at least 10^4 trials");
    return estimate_from_counts(metric, simulate(g, m, offsets, opts));
}

inline EstimateWithCI ping_pong_probability(const CellGeometry& g, const MobilityConfig& m,
                                            const OffsetModel& offsets, const RunOptions& opts)
{
    return estimate(Metric::PingPong, g, m, offsets, opts);
}

}  // namespace hofail::mc
