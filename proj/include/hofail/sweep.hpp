#pragma once

// Parameter sweeps over (velocity, TTT, T_d), result export, and batch
// generation of offset histograms from radio traces.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "geometry.hpp"
#include "histogram.hpp"
#include "monte_carlo.hpp"
#include "semi_analytic.hpp"
#include "trace_sim.hpp"

namespace hofail::sweep {

enum class Mode { Analytic, SemiAnalytic, MonteCarlo };

inline std::string to_string(Mode m)
{
    switch (m) {
    case Mode::Analytic: return "analytic";
    case Mode::SemiAnalytic: return "semi-analytic";
    case Mode::MonteCarlo: return "monte-carlo";
    }
    return "?";
}

inline Mode mode_from_string(const std::string& s)
{
    if (s == "analytic")
        return Mode::Analytic;
    if (s == "semi-analytic" || s == "semi_analytic" || s == "semianalytic")
        return Mode::SemiAnalytic;
    if (s == "monte-carlo" || s == "monte_carlo" || s == "montecarlo" || s == "mc")
        return Mode::MonteCarlo;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

inline std::vector<double> default_velocities()
{
    std::vector<double> v;
    for (int k = 10; k <= 120; k += 10)
        v.push_back(k);
    return v;
}

inline std::vector<double> default_ttts()
{
    std::vector<double> t;
    for (const auto& p : trace::kTttPresets)
        t.push_back(p.ttt_ms);
    return t;
}

inline std::vector<double> default_tds_no_fading() { return {50.0, 150.0, 200.0}; }
inline std::vector<double> default_tds_fading() { return {40.0, 200.0}; }

/// Histogram file name for one grid point inside a histogram directory.
inline std::string histogram_file_name(int fading_case, double velocity_kmh, double ttt_ms, double td_ms)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "case%d_v%g_ttt%g_td%g.json", fading_case, velocity_kmh, ttt_ms, td_ms);
    return buf;
}

struct SweepSpec {
    CellGeometry geometry = CellGeometry::reference();
    std::vector<double> velocities = default_velocities();
    std::vector<double> ttt_ms = default_ttts();
    std::vector<double> td_ms = default_tds_no_fading();
    Mode mode = Mode::Analytic;
    /// A histogram file used for every point, or a directory of per-point files.
    std::optional<std::string> histogram_path;
    int fading_case = 3;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    double ping_pong_threshold = 1.0;
    mc::OffsetMode offset_mode = mc::OffsetMode::Independent;
    unsigned workers = 0;

    void validate() const
    {
        if (velocities.empty() || ttt_ms.empty() || td_ms.empty())
            throw std::invalid_argument("sweep: velocity, TTT and T_d grids must be non-empty");
        for (double v : velocities)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("sweep: velocities must be finite and >= 0");
        for (double t : ttt_ms)
            if (!(t >= 0.0) || !std::isfinite(t))
                throw std::invalid_argument("sweep: TTT values must be finite and >= 0");
        for (double t : td_ms)
            if (!(t > 0.0) || !std::isfinite(t))
                throw std::invalid_argument("sweep: T_d values must be finite and > 0");
        if (mode == Mode::MonteCarlo && trials < mc::kMinTrials)
            throw std::invalid_argument("sweep: Monte Carlo needs at least 10^4 trials");
        if (mode == Mode::SemiAnalytic && !histogram_path)
            throw std::invalid_argument("sweep: semi-analytic mode requires a histogram path");
        if (mode == Mode::Analytic && histogram_path)
            throw std::invalid_argument("sweep: analytic mode does not take a histogram");
        if (!(ping_pong_threshold >= 0.0))
            throw std::invalid_argument("sweep: ping-pong threshold must be >= 0");
    }
};

struct Row {
    double velocity_kmh;
    double ttt_ms;
    double td_ms;
    std::string metric;
    double value;
    std::optional<double> ci;

    auto key() const { return std::tie(velocity_kmh, ttt_ms, td_ms, metric); }
    bool operator==(const Row&) const = default;
};

struct PointError {
    double velocity_kmh;
    double ttt_ms;
    double td_ms;
    std::string message;
};

struct SweepResult {
    std::vector<Row> rows;
    std::vector<PointError> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::uint64_t point_seed(std::uint64_t seed, double v, double ttt, double td)
{
    const auto q = [](double x) { return static_cast<std::uint64_t>(std::llround(x * 1000.0)); };
    std::uint64_t h = mc::detail::splitmix64(seed);
    for (std::uint64_t part : {q(v), q(ttt), q(td)})
        h = mc::detail::splitmix64(h ^ part);
    return h;
}

inline Histogram resolve_histogram(const SweepSpec& spec, double v, double ttt, double td,
                                   std::map<std::string, Histogram>& cache, std::mutex& mu)
{
    namespace fs = std::filesystem;
    std::string path = *spec.histogram_path;
    if (fs::is_directory(path))
        path = (fs::path(path) / histogram_file_name(spec.fading_case, v, ttt, td)).string();
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(path); it != cache.end())
            return it->second;
    }
    Histogram h = load_histogram(path);
    std::lock_guard lock(mu);
    cache.emplace(path, h);
    return h;
}

/// Runs fn(i) for i in [0, n) on a pool of worker threads.
template <class F>
void parallel_for(std::size_t n, unsigned workers, const F& fn)
{
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
}

}  // namespace detail

/// Evaluates every grid point. Failures are collected per point; rows come
/// back sorted by (velocity, TTT, T_d, metric).
inline SweepResult run_sweep(const SweepSpec& spec)
{
    spec.validate();
    struct GridPoint {
        double v, ttt, td;
    };
    std::vector<GridPoint> grid;
    for (double v : spec.velocities)
        for (double ttt : spec.ttt_ms)
            for (double td : spec.td_ms)
                grid.push_back({v, ttt, td});

    std::vector<std::vector<Row>> rows(grid.size());
    std::vector<std::optional<std::string>> errors(grid.size());
    std::map<std::string, Histogram> cache;
    std::mutex cache_mu;

    detail::parallel_for(grid.size(), spec.workers, [&](std::size_t i) {
        const auto [v, ttt, td] = grid[i];
        auto& out = rows[i];
        const auto add = [&](const std::string& metric, double value, std::optional<double> ci = std::nullopt) {
            out.push_back({v, ttt, td, metric, value, ci});
        };
        try {
            const auto mob = MobilityConfig::from_kmh_ms(v, ttt, ttt, td);
            const auto& g = spec.geometry;
            switch (spec.mode) {
            case Mode::Analytic:
                add("mue_hf", analytic::mue_hf_probability(g, mob));
                add("nho", analytic::nho_probability(g, mob));
                add("pue_hf", analytic::pue_hf_probability(g, mob));
                break;
            case Mode::SemiAnalytic: {
                const Histogram h = detail::resolve_histogram(spec, v, ttt, td, cache, cache_mu);
                add("mue_hf", semi_analytic::mue_hf_empirical(g, mob, h));
                add("nho", semi_analytic::nho_empirical(g, mob, h));
                add("pue_hf", semi_analytic::pue_hf_empirical(g, mob, h));
                break;
            }
            case Mode::MonteCarlo: {
                mc::OffsetModel offsets = spec.histogram_path
                                              ? mc::OffsetModel::empirical(detail::resolve_histogram(
                                                                               spec, v, ttt, td, cache, cache_mu),
                                                                           spec.offset_mode)
                                              : mc::OffsetModel::uniform(mob, spec.offset_mode);
                mc::RunOptions opts{spec.trials, detail::point_seed(spec.seed, v, ttt, td),
                                    spec.ping_pong_threshold, 1};
                const auto counts = mc::simulate(g, mob, offsets, opts);
                for (auto [name, metric] : {std::pair{"mue_hf", mc::Metric::MueHF},
                                            std::pair{"nho", mc::Metric::NoHandover},
                                            std::pair{"ping_pong", mc::Metric::PingPong},
                                            std::pair{"pue_hf", mc::Metric::PueHF}}) {
                    const auto e = mc::estimate_from_counts(metric, counts);
                    add(name, e.p_hat, e.half_width_95);
                }
                break;
            }
            }
        } catch (const std::exception& e) {
            out.clear();
            errors[i] = e.what();
        }
    });

    SweepResult result;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        result.rows.insert(result.rows.end(), rows[i].begin(), rows[i].end());
        if (errors[i])
            result.errors.push_back({grid[i].v, grid[i].ttt, grid[i].td, *errors[i]});
    }
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const Row& a, const Row& b) { return a.key() < b.key(); });
    return result;
}

// --- export ------------------------------------------------------------------

inline std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

/// x rounded to 9 significant digits.
inline double round9(double x) { return std::stod(format_number(x)); }

inline void write_csv(const SweepResult& r, std::ostream& out)
{
    out << "velocity_kmh,ttt_ms,td_ms,metric,value,ci\n";
    for (const auto& row : r.rows) {
        out << format_number(row.velocity_kmh) << ',' << format_number(row.ttt_ms) << ','
            << format_number(row.td_ms) << ',' << row.metric << ',' << format_number(row.value) << ','
            << (row.ci ? format_number(*row.ci) : "") << '\n';
    }
}

inline nlohmann::json to_json(const SweepResult& r)
{
    auto arr = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json j{{"velocity_kmh", round9(row.velocity_kmh)},
                         {"ttt_ms", round9(row.ttt_ms)},
                         {"td_ms", round9(row.td_ms)},
                         {"metric", row.metric},
                         {"value", round9(row.value)}};
        j["ci"] = row.ci ? nlohmann::json(round9(*row.ci)) : nlohmann::json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

inline SweepResult result_from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        throw std::invalid_argument("sweep result JSON must be an array");
    SweepResult r;
    for (const auto& o : j) {
        Row row{o.at("velocity_kmh").get<double>(), o.at("ttt_ms").get<double>(), o.at("td_ms").get<double>(),
                o.at("metric").get<std::string>(), o.at("value").get<double>(), std::nullopt};
        if (o.contains("ci") && !o.at("ci").is_null())
            row.ci = o.at("ci").get<double>();
        r.rows.push_back(std::move(row));
    }
    return r;
}

enum class Format { Csv, Json };

inline Format format_from_string(const std::string& s)
{
    if (s == "csv")
        return Format::Csv;
    if (s == "json")
        return Format::Json;
    throw std::invalid_argument("unknown format '" + s + "'");
}

inline void export_result(const SweepResult& r, Format f, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    if (f == Format::Csv)
        write_csv(r, out);
    else
        out << to_json(r).dump(2) << '\n';
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

inline SweepResult load_json_result(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    try {
        return result_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

// --- histogram generation ---------------------------------------------------

struct HistogramJob {
    trace::RadioConfig base_radio;
    std::vector<trace::FadingCase> cases{trace::FadingCase::Case1, trace::FadingCase::Case2,
                                         trace::FadingCase::Case3};
    std::vector<double> velocities = default_velocities();
    std::vector<double> ttt_ms = default_ttts();
    std::vector<double> td_ms{40.0, 50.0, 200.0};
    /// Distance travelled per histogram, split across `traces` independent traces.
    double distance_km = 400.0;
    unsigned traces = 8;
    std::size_t bins = 40;
    std::uint64_t seed = 1;
    unsigned workers = 0;
};

/// Offsets of one (case, velocity, TTT, T_d) point gathered from independent
/// traces; the order depends only on the seed.
inline std::vector<double> collect_offsets(const trace::RadioConfig& radio, const MobilityConfig& mob,
                                           double distance_km, unsigned traces, std::uint64_t seed,
                                           unsigned workers = 0)
{
    if (!(mob.speed() > 0.0))
        throw std::invalid_argument("collect_offsets: speed must be > 0");
    traces = std::max(1u, traces);
    const double duration = distance_km * 1000.0 / mob.speed() / static_cast<double>(traces);
    std::vector<std::vector<double>> parts(traces);
    detail::parallel_for(traces, workers, [&](std::size_t i) {
        const auto log = trace::run_trace(radio, mob, duration, mc::detail::chunk_seed(seed, i));
        parts[i] = trace::extract_offsets(log, trace::OffsetReference::IdealEntry);
    });
    std::vector<double> all;
    for (const auto& p : parts)
        all.insert(all.end(), p.begin(), p.end());
    return all;
}

/// Writes one histogram JSON per grid point into `out_dir` and returns the paths.
inline std::vector<std::string> generate_histograms(const HistogramJob& job, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    struct Item {
        trace::FadingCase c;
        double v, ttt, td;
    };
    std::vector<Item> items;
    for (auto c : job.cases)
        for (double v : job.velocities)
            for (double ttt : job.ttt_ms)
                for (double td : job.td_ms)
                    items.push_back({c, v, ttt, td});

    std::vector<std::string> paths(items.size());
    std::vector<std::optional<std::string>> errors(items.size());
    detail::parallel_for(items.size(), job.workers, [&](std::size_t i) {
        const auto& it = items[i];
        try {
            auto radio = trace::radio_for_case(it.c, job.base_radio);
            radio.l3_coefficient_k = trace::preset_for_ttt(it.ttt).l3_k;
            const auto mob = MobilityConfig::from_kmh_ms(it.v, it.ttt, it.ttt, it.td);
            // The seed ignores TTT and T_d so those grid points share paths and channel draws.
            const std::uint64_t seed =
                mc::detail::splitmix64(detail::point_seed(job.seed, it.v, 0.0, 0.0) ^ static_cast<std::uint64_t>(it.c));
            const auto offsets = collect_offsets(radio, mob, job.distance_km, job.traces, seed, 1);
            const auto h = trace::offsets_to_histogram(offsets, job.bins);
            const auto path = (fs::path(out_dir) / histogram_file_name(static_cast<int>(it.c), it.v, it.ttt, it.td))
                                  .string();
            save_histogram(h, path);
            paths[i] = path;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < items.size(); ++i)
        if (errors[i])
            throw std::runtime_error("histogram case" + std::to_string(static_cast<int>(items[i].c)) + " v="
                                     + format_number(items[i].v) + " ttt=" + format_number(items[i].ttt)
                                     + " td=" + format_number(items[i].td) + ": " + *errors[i]);
    return paths;
}

}  // namespace hofail::sweep
