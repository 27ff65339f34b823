#pragma once

// Desk-scale radio trace simulator: one UE bouncing inside a ring around a
// picocell, RSRP sampled every 40 ms from a macro and a pico, L1/L3 filtered,
// and checked against the handover entry condition every T_d.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "geometry.hpp"
#include "histogram.hpp"

namespace hofail::trace {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Point lerp(Point a, Point b, double w) { return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)}; }

enum class Cell { Macro, Pico };

inline std::string to_string(Cell c) { return c == Cell::Macro ? "macro" : "pico"; }
inline Cell other(Cell c) { return c == Cell::Macro ? Cell::Pico : Cell::Macro; }

inline Cell cell_from_string(const std::string& s)
{
    if (s == "macro")
        return Cell::Macro;
    if (s == "pico")
        return Cell::Pico;
    throw std::invalid_argument("unknown cell '" + s + "'");
}

/// intercept + slope·log10(d / 1 km), with d floored at 1 m.
struct PathLoss {
    double intercept;
    double slope;
    double operator()(double d_m) const { return intercept + slope * std::log10(std::max(d_m, 1.0) / 1000.0); }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RadioConfig {
    Point macro_pos{1500.0, 1500.0};
    Point pico_pos{2000.0, 1500.0};
    double macro_tx_power = 46.0;  // dBm
    double pico_tx_power = 30.0;   // dBm
    PathLoss pathloss_macro{128.1, 37.6};
    PathLoss pathloss_pico{140.7, 36.7};
    double shadowing_sigma_macro = 8.0;  // dB, 0 disables
    double shadowing_sigma_pico = 10.0;  // dB
    double shadowing_decorrelation = 25.0;  // m
    bool fast_fading_enabled = true;
    double hysteresis = 2.0;   // dB
    double qout_sinr = -8.0;   // dB
    double noise_power = -95.0;  // dBm
    double rsrp_sample_period = 0.040;  // s
    int l1_window = 5;
    int l3_coefficient_k = 4;
    double ring_radius = 200.0;  // m, centred on the pico

    void validate() const
    {
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(macro_pos.x) || !finite(macro_pos.y) || !finite(pico_pos.x) || !finite(pico_pos.y))
            throw ConfigError("RadioConfig: positions must be finite");
        if (macro_pos == pico_pos)
            throw ConfigError("RadioConfig: macro and pico must not be co-located");
        if (!(shadowing_sigma_macro >= 0.0) || !(shadowing_sigma_pico >= 0.0))
            throw ConfigError("RadioConfig: shadowing sigma must be >= 0");
        if (!(shadowing_decorrelation > 0.0))
            throw ConfigError("RadioConfig: shadowing decorrelation must be > 0");
        if (std::abs(rsrp_sample_period - 0.040) > 1e-12)
            throw ConfigError("RadioConfig: RSRP sample period is fixed at 40 ms");
        if (l1_window != 5)
            throw ConfigError("RadioConfig: L1 window is fixed at 5 samples");
        if (l3_coefficient_k < 0)
            throw ConfigError("RadioConfig: L3 filter index k must be >= 0");
        if (!(hysteresis >= 0.0))
            throw ConfigError("RadioConfig: hysteresis must be >= 0");
        if (!(ring_radius > 0.0))
            throw ConfigError("RadioConfig: ring radius must be > 0");
        if (!finite(noise_power) || !finite(qout_sinr) || !finite(macro_tx_power) || !finite(pico_tx_power))
            throw ConfigError("RadioConfig: powers must be finite");
    }

    double l3_coefficient() const;
};

/// L3 index k mapped to the standard coefficient a = (1/2)^(k/4).
inline double l3_coefficient_from_index(int k) { return std::pow(0.5, static_cast<double>(k) / 4.0); }

inline double RadioConfig::l3_coefficient() const { return l3_coefficient_from_index(l3_coefficient_k); }

// --- key=value config files ----------------------------------------------
//
// Keys (units): macro_x, macro_y, pico_x, pico_y (m); macro_tx_power,
// pico_tx_power (dBm); pathloss_macro_intercept, pathloss_macro_slope,
// pathloss_pico_intercept, pathloss_pico_slope (dB, dB/decade);
// shadowing_sigma (dB, sets both), shadowing_sigma_macro, shadowing_sigma_pico (dB);
// shadowing_decorrelation (m); fast_fading (true/false); hysteresis (dB);
// qout_sinr (dB); noise_power (dBm); rsrp_sample_period_ms; l1_window;
// l3_k; ring_radius (m). Blank lines and '#' comments are ignored.

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "on" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "off" || v == "no")
        return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

/// Reads `key = value` lines into a map, rejecting duplicates and malformed lines.
inline std::map<std::string, std::string> read_key_values(std::istream& in)
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + key + "'");
    }
    return kv;
}

/// Applies radio keys from `kv` onto `cfg`; keys it does not know are left in `kv`.
inline void apply_radio_keys(RadioConfig& cfg, std::map<std::string, std::string>& kv)
{
    using setter = std::function<void(const std::string&, const std::string&)>;
    const auto num = [](double& field) -> setter {
        return [&field](const std::string& k, const std::string& v) { field = detail::parse_double(k, v); };
    };
    const std::map<std::string, setter> setters{
        {"macro_x", num(cfg.macro_pos.x)},
        {"macro_y", num(cfg.macro_pos.y)},
        {"pico_x", num(cfg.pico_pos.x)},
        {"pico_y", num(cfg.pico_pos.y)},
        {"macro_tx_power", num(cfg.macro_tx_power)},
        {"pico_tx_power", num(cfg.pico_tx_power)},
        {"pathloss_macro_intercept", num(cfg.pathloss_macro.intercept)},
        {"pathloss_macro_slope", num(cfg.pathloss_macro.slope)},
        {"pathloss_pico_intercept", num(cfg.pathloss_pico.intercept)},
        {"pathloss_pico_slope", num(cfg.pathloss_pico.slope)},
        {"shadowing_sigma",
         [&](const std::string& k, const std::string& v) {
             cfg.shadowing_sigma_macro = cfg.shadowing_sigma_pico = detail::parse_double(k, v);
         }},
        {"shadowing_sigma_macro", num(cfg.shadowing_sigma_macro)},
        {"shadowing_sigma_pico", num(cfg.shadowing_sigma_pico)},
        {"shadowing_decorrelation", num(cfg.shadowing_decorrelation)},
        {"fast_fading",
         [&](const std::string& k, const std::string& v) { cfg.fast_fading_enabled = detail::parse_bool(k, v); }},
        {"hysteresis", num(cfg.hysteresis)},
        {"qout_sinr", num(cfg.qout_sinr)},
        {"noise_power", num(cfg.noise_power)},
        {"rsrp_sample_period_ms",
         [&](const std::string& k, const std::string& v) {
             cfg.rsrp_sample_period = detail::parse_double(k, v) / 1000.0;
         }},
        {"l1_window",
         [&](const std::string& k, const std::string& v) {
             cfg.l1_window = static_cast<int>(detail::parse_double(k, v));
         }},
        {"l3_k",
         [&](const std::string& k, const std::string& v) {
             cfg.l3_coefficient_k = static_cast<int>(detail::parse_double(k, v));
         }},
        {"ring_radius", num(cfg.ring_radius)},
    };
    for (auto it = kv.begin(); it != kv.end();) {
        if (const auto s = setters.find(it->first); s != setters.end()) {
            s->second(it->first, it->second);
            it = kv.erase(it);
        } else {
            ++it;
        }
    }
}

inline RadioConfig parse_radio_config(std::istream& in, RadioConfig base = {})
{
    auto kv = read_key_values(in);
    apply_radio_keys(base, kv);
    if (!kv.empty())
        throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
    base.validate();
    return base;
}

inline RadioConfig load_radio_config(const std::string& path, RadioConfig base = {})
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open radio config '" + path + "'");
    try {
        return parse_radio_config(in, base);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// --- presets ---------------------------------------------------------------

/// Channel scenarios: no shadowing or fading, shadowing only, shadowing and fading.
enum class FadingCase { Case1 = 1, Case2 = 2, Case3 = 3 };

inline RadioConfig radio_for_case(FadingCase c, RadioConfig base = {})
{
    if (c == FadingCase::Case1) {
        base.shadowing_sigma_macro = 0.0;
        base.shadowing_sigma_pico = 0.0;
    }
    base.fast_fading_enabled = c == FadingCase::Case3;
    return base;
}

struct TttPreset {
    double ttt_ms;
    int l3_k;
    bool operator==(const TttPreset&) const = default;
};

inline constexpr std::array<TttPreset, 4> kTttPresets{{{480.0, 4}, {160.0, 1}, {80.0, 1}, {40.0, 0}}};

inline TttPreset preset_for_ttt(double ttt_ms)
{
    for (const auto& p : kTttPresets)
        if (p.ttt_ms == ttt_ms)
            return p;
    throw std::invalid_argument("no TTT preset for " + std::to_string(ttt_ms) + " ms");
}

// --- filters ---------------------------------------------------------------

/// Arithmetic mean of linear-power samples.
inline double l1_filter(std::span<const double> samples)
{
    if (samples.empty())
        throw std::invalid_argument("l1_filter: no samples");
    double sum = 0.0;
    for (double s : samples) {
        if (!(s > 0.0))
            throw std::invalid_argument("l1_filter: samples must be positive");
        sum += s;
    }
    return sum / static_cast<double>(samples.size());
}

/// F(n) = (1−a)F(n−1) + a·10log10(M(n)).
inline double l3_filter(double prev_db, double m_linear, double a)
{
    if (!(m_linear > 0.0))
        throw std::invalid_argument("l3_filter: measurement must be positive");
    if (!(a > 0.0 && a <= 1.0))
        throw std::invalid_argument("l3_filter: coefficient must be in (0, 1]");
    return (1.0 - a) * prev_db + a * 10.0 * std::log10(m_linear);
}

/// Coefficient for updates every `dt` with the same time constant as `a` per 200 ms.
inline double l3_coefficient_for_period(double a, double dt, double reference_period = 0.2)
{
    return 1.0 - std::pow(1.0 - a, dt / reference_period);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// --- mobility --------------------------------------------------------------

struct UEState {
    Point position;
    double heading = 0.0;  // rad, w.r.t. +x
    Cell serving = Cell::Macro;
    double l3_macro = 0.0;
    double l3_pico = 0.0;
    double ttt_elapsed = 0.0;
    int leg = 0;
};

/// Uniform inward heading at a point on the ring.
template <class Rng>
double bounce_heading(Point at, Point center, Rng& rng)
{
    const double inward = std::atan2(center.y - at.y, center.x - at.x);
    std::uniform_real_distribution<double> spread(-kPi / 2.0, kPi / 2.0);
    return inward + spread(rng);
}

/// Moves the UE υ·dt along its heading. Leaving the ring clamps the UE to the
/// crossing point and draws a new inward heading; the leg counter advances.
template <class Rng>
UEState step_bouncing_ring(UEState s, double speed, double dt, Point center, double ring_radius, Rng& rng)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("step_bouncing_ring: dt must be > 0");
    const double ux = std::cos(s.heading);
    const double uy = std::sin(s.heading);
    const double step = speed * dt;
    Point next{s.position.x + step * ux, s.position.y + step * uy};
    if (distance(next, center) <= ring_radius) {
        s.position = next;
        return s;
    }
    // Solve |p + t·u − c| = R for the forward root.
    const double px = s.position.x - center.x;
    const double py = s.position.y - center.y;
    const double b = px * ux + py * uy;
    const double c = px * px + py * py - ring_radius * ring_radius;
    const double t = std::clamp(-b + std::sqrt(std::max(0.0, b * b - c)), 0.0, step);
    Point hit{s.position.x + t * ux, s.position.y + t * uy};
    const double r = distance(hit, center);
    if (r > 0.0) {
        hit.x = center.x + (hit.x - center.x) * ring_radius / r;
        hit.y = center.y + (hit.y - center.y) * ring_radius / r;
    }
    s.position = hit;
    s.heading = bounce_heading(hit, center, rng);
    ++s.leg;
    return s;
}

// --- event log -------------------------------------------------------------

enum class EventKind { Trigger, Handover, HandoverFailure, RadioLinkFailure, IdealEntry, IdealExit };

inline std::string to_string(EventKind k)
{
    switch (k) {
    case EventKind::Trigger: return "trigger";
    case EventKind::Handover: return "handover";
    case EventKind::HandoverFailure: return "hf";
    case EventKind::RadioLinkFailure: return "rlf";
    case EventKind::IdealEntry: return "ideal_entry";
    case EventKind::IdealExit: return "ideal_exit";
    }
    return "?";
}

inline EventKind event_kind_from_string(const std::string& s)
{
    for (auto k : {EventKind::Trigger, EventKind::Handover, EventKind::HandoverFailure,
                   EventKind::RadioLinkFailure, EventKind::IdealEntry, EventKind::IdealExit})
        if (to_string(k) == s)
            return k;
    throw std::invalid_argument("unknown event kind '" + s + "'");
}

/// What became of a TTT started by a trigger.
enum class TriggerOutcome { None, Pending, Handover, Failure, Aborted };

inline std::string to_string(TriggerOutcome o)
{
    switch (o) {
    case TriggerOutcome::None: return "";
    case TriggerOutcome::Pending: return "pending";
    case TriggerOutcome::Handover: return "handover";
    case TriggerOutcome::Failure: return "failure";
    case TriggerOutcome::Aborted: return "aborted";
    }
    return "?";
}

inline TriggerOutcome trigger_outcome_from_string(const std::string& s)
{
    for (auto o : {TriggerOutcome::None, TriggerOutcome::Pending, TriggerOutcome::Handover,
                   TriggerOutcome::Failure, TriggerOutcome::Aborted})
        if (to_string(o) == s)
            return o;
    throw std::invalid_argument("unknown trigger outcome '" + s + "'");
}

struct Event {
    EventKind kind;
    Point position;
    double t;
    Cell serving;
    int leg;
    TriggerOutcome outcome = TriggerOutcome::None;
    bool operator==(const Event&) const = default;
};

struct EventLog {
    Point pico_pos;
    double speed = 0.0;
    std::vector<Event> events;  // chronological

    std::vector<Event> of_kind(EventKind k) const
    {
        std::vector<Event> out;
        for (const auto& e : events)
            if (e.kind == k)
                out.push_back(e);
        return out;
    }
    std::vector<Event> trigger_events() const { return of_kind(EventKind::Trigger); }
    std::vector<Event> hf_events() const { return of_kind(EventKind::HandoverFailure); }

    bool operator==(const EventLog&) const = default;
};

/// One JSON object per line; the first line carries the trace header.
inline void write_jsonl(const EventLog& log, std::ostream& out)
{
    out << nlohmann::json{{"kind", "header"}, {"pico_x", log.pico_pos.x}, {"pico_y", log.pico_pos.y},
                          {"speed", log.speed}}
                .dump()
        << '\n';
    for (const auto& e : log.events) {
        nlohmann::json j{{"kind", to_string(e.kind)},  {"x", e.position.x}, {"y", e.position.y},
                         {"t", e.t},                   {"serving", to_string(e.serving)},
                         {"leg", e.leg}};
        if (e.outcome != TriggerOutcome::None)
            j["outcome"] = to_string(e.outcome);
        out << j.dump() << '\n';
    }
}

inline EventLog read_jsonl(std::istream& in)
{
    EventLog log;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "header") {
            log.pico_pos = {j.at("pico_x").get<double>(), j.at("pico_y").get<double>()};
            log.speed = j.at("speed").get<double>();
            header = true;
            continue;
        }
        Event e{event_kind_from_string(kind),
                {j.at("x").get<double>(), j.at("y").get<double>()},
                j.at("t").get<double>(),
                cell_from_string(j.at("serving").get<std::string>()),
                j.at("leg").get<int>()};
        if (j.contains("outcome"))
            e.outcome = trigger_outcome_from_string(j.at("outcome").get<std::string>());
        log.events.push_back(e);
    }
    if (!header)
        throw std::runtime_error("event log: missing header line");
    return log;
}

// --- simulation --------------------------------------------------------------

namespace detail {

/// Exponentially correlated Gaussian process indexed by travelled distance.
class ShadowingProcess {
public:
    ShadowingProcess(double sigma, double decorrelation) : sigma_(sigma), decorrelation_(decorrelation) {}

    template <class Rng>
    double start(Rng& rng)
    {
        value_ = sigma_ > 0.0 ? sigma_ * normal_(rng) : 0.0;
        return value_;
    }
    template <class Rng>
    double advance(double moved, Rng& rng)
    {
        if (sigma_ <= 0.0)
            return 0.0;
        const double rho = std::exp(-moved / decorrelation_);
        value_ = rho * value_ + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * sigma_ * normal_(rng);
        return value_;
    }
    double value() const { return value_; }

private:
    double sigma_;
    double decorrelation_;
    double value_ = 0.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// L1 sliding mean feeding an L3 IIR filter, both per cell.
class MeasurementChain {
public:
    MeasurementChain(std::size_t window, double a) : window_(window), a_(a) {}

    void push(double macro_linear, double pico_linear)
    {
        add(macro_, macro_linear);
        add(pico_, pico_linear);
        const double l1_m = l1_filter(std::span<const double>(macro_.begin(), macro_.end()));
        const double l1_p = l1_filter(std::span<const double>(pico_.begin(), pico_.end()));
        if (!primed_) {
            f_macro_ = linear_to_db(l1_m);
            f_pico_ = linear_to_db(l1_p);
            primed_ = true;
        } else {
            f_macro_ = l3_filter(f_macro_, l1_m, a_);
            f_pico_ = l3_filter(f_pico_, l1_p, a_);
        }
    }
    double macro_db() const { return f_macro_; }
    double pico_db() const { return f_pico_; }
    double of(Cell c) const { return c == Cell::Macro ? f_macro_ : f_pico_; }

private:
    void add(std::vector<double>& buf, double v)
    {
        if (buf.size() == window_)
            buf.erase(buf.begin());
        buf.push_back(v);
    }
    std::size_t window_;
    double a_;
    std::vector<double> macro_, pico_;
    double f_macro_ = 0.0;
    double f_pico_ = 0.0;
    bool primed_ = false;
};

inline std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace detail

/// Simulates `duration` seconds of one UE. The UE starts on the ring with an
/// inward heading, served by the stronger cell.
///
/// Alongside the measured chain a reference chain with identical shadowing and
/// filters but no fast fading is tracked; its crossings of ±hysteresis are
/// logged as ideal_entry / ideal_exit events at the interpolated position.
inline EventLog run_trace(const RadioConfig& radio, const MobilityConfig& mob, double duration,
                          std::uint64_t seed)
{
    radio.validate();
    if (mob.sampling_period() < radio.rsrp_sample_period - 1e-12)
        throw ConfigError("run_trace: T_d must not be shorter than the 40 ms RSRP sample period");
    if (!(duration > 0.0))
        throw ConfigError("run_trace: duration must be > 0");

    std::mt19937_64 rng(seed);
    std::mt19937_64 fading_rng(seed ^ 0xA24BAED4963EE407ull);
    std::exponential_distribution<double> rayleigh_power(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double dt = radio.rsrp_sample_period;
    const std::int64_t dt_us = detail::to_us(dt);
    const std::int64_t td_us = detail::to_us(mob.sampling_period());
    const std::int64_t ttt_macro_us = detail::to_us(mob.ttt_macro());
    const std::int64_t ttt_pico_us = detail::to_us(mob.ttt_pico());
    const std::int64_t samples = static_cast<std::int64_t>(std::floor(duration / dt)) + 1;
    const double a = l3_coefficient_for_period(radio.l3_coefficient(), dt);
    const double noise_lin = db_to_linear(radio.noise_power);

    EventLog log;
    log.pico_pos = radio.pico_pos;
    log.speed = mob.speed();

    UEState ue;
    {
        const double phi = 2.0 * kPi * unit(rng);
        ue.position = {radio.pico_pos.x + radio.ring_radius * std::cos(phi),
                       radio.pico_pos.y + radio.ring_radius * std::sin(phi)};
        ue.heading = bounce_heading(ue.position, radio.pico_pos, rng);
    }
    // Entry checks run on the sample grid, starting at a random sample.
    std::int64_t next_check_us = dt_us * static_cast<std::int64_t>(unit(rng) * static_cast<double>((td_us + dt_us - 1) / dt_us));

    detail::ShadowingProcess shadow_m(radio.shadowing_sigma_macro, radio.shadowing_decorrelation);
    detail::ShadowingProcess shadow_p(radio.shadowing_sigma_pico, radio.shadowing_decorrelation);
    shadow_m.start(rng);
    shadow_p.start(rng);

    detail::MeasurementChain measured(static_cast<std::size_t>(radio.l1_window), a);
    detail::MeasurementChain reference(static_cast<std::size_t>(radio.l1_window), a);

    bool ttt_active = false;
    std::int64_t ttt_start_us = 0;
    std::size_t open_trigger = 0;
    bool in_rlf = false;
    std::optional<double> prev_ref_diff;
    Point prev_pos = ue.position;
    int prev_leg = ue.leg;
    bool first = true;

    const auto wideband = [&](Cell c) {
        if (c == Cell::Macro)
            return radio.macro_tx_power - radio.pathloss_macro(distance(ue.position, radio.macro_pos))
                   - shadow_m.value();
        return radio.pico_tx_power - radio.pathloss_pico(distance(ue.position, radio.pico_pos)) - shadow_p.value();
    };
    const auto close_trigger = [&](TriggerOutcome o) {
        log.events[open_trigger].outcome = o;
        ttt_active = false;
        ue.ttt_elapsed = 0.0;
    };

    for (std::int64_t n = 0; n < samples; ++n) {
        const std::int64_t t_us = n * dt_us;
        const double t = static_cast<double>(t_us) * 1e-6;

        // Sample n.
        const double w_m = wideband(Cell::Macro);
        const double w_p = wideband(Cell::Pico);
        double fade_m = 1.0;
        double fade_p = 1.0;
        if (radio.fast_fading_enabled) {
            fade_m = rayleigh_power(fading_rng);
            fade_p = rayleigh_power(fading_rng);
        }
        measured.push(db_to_linear(w_m) * fade_m, db_to_linear(w_p) * fade_p);
        reference.push(db_to_linear(w_m), db_to_linear(w_p));
        ue.l3_macro = measured.macro_db();
        ue.l3_pico = measured.pico_db();
        if (first) {
            ue.serving = w_p > w_m ? Cell::Pico : Cell::Macro;
            first = false;
        }

        // Ideal boundary crossings on the reference chain.
        const double ref_diff = reference.pico_db() - reference.macro_db();
        if (prev_ref_diff) {
            const double h = radio.hysteresis;
            const auto crossing = [&](EventKind k, double level) {
                const double w = (level - *prev_ref_diff) / (ref_diff - *prev_ref_diff);
                const bool same_leg = prev_leg == ue.leg;
                const Point p = same_leg ? lerp(prev_pos, ue.position, w) : ue.position;
                const double te = same_leg ? t - dt + w * dt : t;
                log.events.push_back({k, p, te, ue.serving, ue.leg});
            };
            if (*prev_ref_diff <= h && ref_diff > h)
                crossing(EventKind::IdealEntry, h);
            if (*prev_ref_diff >= -h && ref_diff < -h)
                crossing(EventKind::IdealExit, -h);
        }
        prev_ref_diff = ref_diff;

        // Radio link monitoring on wideband SINR (no fast fading).
        const double w_serv = ue.serving == Cell::Macro ? w_m : w_p;
        const double w_other = ue.serving == Cell::Macro ? w_p : w_m;
        const double sinr = w_serv - linear_to_db(db_to_linear(w_other) + noise_lin);
        if (sinr < radio.qout_sinr) {
            const Cell stronger = w_p > w_m ? Cell::Pico : Cell::Macro;
            if (ttt_active) {
                log.events.push_back({EventKind::HandoverFailure, ue.position, t, ue.serving, ue.leg});
                close_trigger(TriggerOutcome::Failure);
                ue.serving = stronger;
            } else if (!in_rlf) {
                log.events.push_back({EventKind::RadioLinkFailure, ue.position, t, ue.serving, ue.leg});
            }
            in_rlf = true;
        } else {
            in_rlf = false;
        }

        // Advance to sample n+1, then process checks and TTT expiry in between.
        prev_pos = ue.position;
        prev_leg = ue.leg;
        const UEState moved = step_bouncing_ring(ue, mob.speed(), dt, radio.pico_pos, radio.ring_radius, rng);
        const Point next_pos = moved.position;
        const std::int64_t end_us = t_us + dt_us;
        const auto where = [&](std::int64_t at_us) {
            return lerp(prev_pos, next_pos, static_cast<double>(at_us - t_us) / static_cast<double>(dt_us));
        };
        while (true) {
            const std::int64_t expiry_us =
                ttt_active ? ttt_start_us + (ue.serving == Cell::Macro ? ttt_macro_us : ttt_pico_us)
                           : std::numeric_limits<std::int64_t>::max();
            const std::int64_t when = std::min(expiry_us, next_check_us);
            if (when >= end_us)
                break;
            const double tw = static_cast<double>(when) * 1e-6;
            if (expiry_us <= next_check_us) {
                log.events.push_back({EventKind::Handover, where(when), tw, ue.serving, ue.leg});
                close_trigger(TriggerOutcome::Handover);
                ue.serving = other(ue.serving);
                continue;
            }
            const bool entry = measured.of(other(ue.serving)) > measured.of(ue.serving) + radio.hysteresis;
            if (entry && !ttt_active) {
                ttt_active = true;
                ttt_start_us = when;
                open_trigger = log.events.size();
                log.events.push_back(
                    {EventKind::Trigger, where(when), tw, ue.serving, ue.leg, TriggerOutcome::Pending});
            } else if (!entry && ttt_active) {
                close_trigger(TriggerOutcome::Aborted);
            }
            next_check_us += td_us;
        }
        ue.ttt_elapsed = ttt_active ? static_cast<double>(end_us - ttt_start_us) * 1e-6 : 0.0;

        const double moved_by = distance(prev_pos, next_pos);
        ue.position = next_pos;
        ue.heading = moved.heading;
        ue.leg = moved.leg;
        shadow_m.advance(moved_by, rng);
        shadow_p.advance(moved_by, rng);
    }
    // Events were appended in sample order; interpolated crossings may sit
    // slightly before events logged during the preceding interval.
    std::stable_sort(log.events.begin(), log.events.end(),
                     [](const Event& x, const Event& y) { return x.t < y.t; });
    return log;
}

// --- offsets -----------------------------------------------------------------

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinOffsetEvents = 100;

enum class OffsetReference {
    /// Signed along-track distance from the ideal_entry on the same leg.
    IdealEntry,
    /// Signed radial distance R − |p − pico| from the coverage circle.
    Circle,
};

/// Offsets of completed macro->pico triggers (handover or failure), positive inward.
inline std::vector<double> extract_offsets(const EventLog& log, OffsetReference ref,
                                           double coverage_radius = 0.0)
{
    std::vector<double> out;
    std::map<int, std::vector<const Event*>> entries_by_leg;
    for (const auto& e : log.events)
        if (e.kind == EventKind::IdealEntry)
            entries_by_leg[e.leg].push_back(&e);
    for (const auto& e : log.events) {
        if (e.kind != EventKind::Trigger || e.serving != Cell::Macro)
            continue;
        if (e.outcome != TriggerOutcome::Handover && e.outcome != TriggerOutcome::Failure)
            continue;
        if (ref == OffsetReference::Circle) {
            out.push_back(coverage_radius - distance(e.position, log.pico_pos));
            continue;
        }
        const auto it = entries_by_leg.find(e.leg);
        if (it == entries_by_leg.end())
            continue;
        const Event* best = nullptr;
        for (const Event* c : it->second)
            if (!best || std::abs(c->t - e.t) < std::abs(best->t - e.t))
                best = c;
        const double d = distance(e.position, best->position);
        out.push_back(e.t >= best->t ? d : -d);
    }
    return out;
}

inline Histogram offsets_to_histogram(const std::vector<double>& offsets, std::size_t bins)
{
    if (offsets.size() < kMinOffsetEvents)
        throw InsufficientDataError("offset histogram: " + std::to_string(offsets.size())
                                    + " trigger events, need at least " + std::to_string(kMinOffsetEvents));
    return Histogram::from_samples(offsets, bins);
}

inline Histogram extract_offset_histogram(const EventLog& log, const CellGeometry& geom, std::size_t bins,
                                          OffsetReference ref = OffsetReference::IdealEntry)
{
    return offsets_to_histogram(extract_offsets(log, ref, geom.coverage_radius()), bins);
}

// --- chord statistics of the bouncing ring ----------------------------------

/// Lengths of the chords that straight legs of the bouncing ring cut through a
/// concentric circle of radius `inner_radius`, until `crossings` are collected.
inline std::vector<double> ring_crossing_chords(double inner_radius, double ring_radius, std::size_t crossings,
                                                std::uint64_t seed)
{
    if (!(inner_radius > 0.0 && inner_radius < ring_radius))
        throw std::invalid_argument("ring_crossing_chords: need 0 < inner radius < ring radius");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Point c{0.0, 0.0};
    const double phi = 2.0 * kPi * unit(rng);
    Point p{ring_radius * std::cos(phi), ring_radius * std::sin(phi)};
    std::vector<double> chords;
    chords.reserve(crossings);
    while (chords.size() < crossings) {
        const double h = bounce_heading(p, c, rng);
        const double ux = std::cos(h);
        const double uy = std::sin(h);
        // Perpendicular distance of the leg's line from the centre.
        const double perp = std::abs(p.x * uy - p.y * ux);
        if (perp < inner_radius)
            chords.push_back(2.0 * std::sqrt(inner_radius * inner_radius - perp * perp));
        const double b = p.x * ux + p.y * uy;
        const double t = -2.0 * b;  // second intersection with the ring
        p = {p.x + t * ux, p.y + t * uy};
        const double r = std::hypot(p.x, p.y);
        p = {p.x * ring_radius / r, p.y * ring_radius / r};
    }
    return chords;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty())
        throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace hofail::trace
