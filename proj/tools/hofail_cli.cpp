// hofail: batch front-end for handover-failure sweeps, histogram generation
// and single radio traces.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <hofail/hofail.hpp>

namespace fs = std::filesystem;
using namespace hofail;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitPointFailures = 2;

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

/// "10,20,30" or "start:stop:step".
std::vector<double> parse_grid(const std::string& s)
{
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3)
            throw std::invalid_argument("range '" + s + "' must be start:stop:step");
        const double a = std::stod(parts[0]);
        const double b = std::stod(parts[1]);
        const double h = std::stod(parts[2]);
        if (!(h > 0.0) || b < a)
            throw std::invalid_argument("range '" + s + "' is empty");
        std::vector<double> out;
        for (int i = 0; a + i * h <= b + 1e-9 * h; ++i)
            out.push_back(a + i * h);
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(s, ','))
        out.push_back(std::stod(p));
    if (out.empty())
        throw std::invalid_argument("empty list '" + s + "'");
    return out;
}

CellGeometry parse_geometry(const std::string& s)
{
    const auto v = parse_grid(s);
    if (v.size() != 3)
        throw std::invalid_argument("--geometry expects R,rm,rp");
    return {v[0], v[1], v[2]};
}

// List flags accept "a,b,c", separate tokens "a b c", or "start:stop:step".
CLI::Option* add_list(CLI::App* cmd, const std::string& name, std::string& target, const std::string& desc)
{
    return cmd
        ->add_option_function<std::vector<std::string>>(
            name,
            [&target](const std::vector<std::string>& parts) {
                std::string joined;
                for (const auto& p : parts)
                    joined += (joined.empty() ? "" : ",") + p;
                target = joined;
            },
            desc)
        ->default_str(target);
}

std::optional<std::string> env_out_dir()
{
    if (const char* d = std::getenv("HOFAIL_OUT_DIR"); d && *d)
        return std::string(d);
    return std::nullopt;
}

struct SweepArgs {
    std::string mode = "analytic";
    std::string geometry = "64,50,78";
    std::string velocities = "10:120:10";
    std::string ttt_set = "480,160,80,40";
    std::string td = "50,150,200";
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    std::string histogram;
    int histogram_case = 3;
    double ping_pong_threshold = 1.0;
    std::string offset_mode = "independent";
    std::string out;
    std::string format = "csv";
    std::string config;
    unsigned workers = 0;
};

/// Keys in the config file mirror the long flag names with '-' replaced by '_'.
void apply_sweep_config(SweepArgs& a, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config '" + path + "'");
    const auto kv = trace::read_key_values(in);
    for (const auto& [k, v] : kv) {
        if (k == "mode") a.mode = v;
        else if (k == "geometry") a.geometry = v;
        else if (k == "velocities") a.velocities = v;
        else if (k == "ttt_set") a.ttt_set = v;
        else if (k == "td") a.td = v;
        else if (k == "trials") a.trials = std::stoull(v);
        else if (k == "seed") a.seed = std::stoull(v);
        else if (k == "histogram") a.histogram = v;
        else if (k == "histogram_case") a.histogram_case = std::stoi(v);
        else if (k == "ping_pong_threshold") a.ping_pong_threshold = std::stod(v);
        else if (k == "offset_mode") a.offset_mode = v;
        else if (k == "out") a.out = v;
        else if (k == "format") a.format = v;
        else if (k == "workers") a.workers = static_cast<unsigned>(std::stoul(v));
        else throw std::runtime_error(path + ": unknown key '" + k + "'");
    }
}

void write_error_manifest(const sweep::SweepResult& r, std::ostream& out)
{
    auto arr = nlohmann::json::array();
    for (const auto& e : r.errors)
        arr.push_back({{"velocity_kmh", e.velocity_kmh}, {"ttt_ms", e.ttt_ms}, {"td_ms", e.td_ms},
                       {"error", e.message}});
    out << arr.dump(2) << '\n';
}

int run_sweep_command(SweepArgs a)
{
    if (!a.config.empty())
        apply_sweep_config(a, a.config);

    sweep::SweepSpec spec;
    spec.mode = sweep::mode_from_string(a.mode);
    spec.geometry = parse_geometry(a.geometry);
    spec.velocities = parse_grid(a.velocities);
    spec.ttt_ms = parse_grid(a.ttt_set);
    spec.td_ms = parse_grid(a.td);
    spec.trials = a.trials;
    spec.seed = a.seed;
    if (!a.histogram.empty())
        spec.histogram_path = a.histogram;
    spec.fading_case = a.histogram_case;
    spec.ping_pong_threshold = a.ping_pong_threshold;
    if (a.offset_mode == "shared")
        spec.offset_mode = mc::OffsetMode::Shared;
    else if (a.offset_mode != "independent")
        throw std::invalid_argument("--offset-mode must be shared or independent");
    spec.workers = a.workers;
    const auto format = sweep::format_from_string(a.format);
    if (spec.histogram_path && !fs::exists(*spec.histogram_path))
        throw std::runtime_error("histogram path not found: '" + *spec.histogram_path + "'");

    const auto result = sweep::run_sweep(spec);

    std::string out = a.out;
    if (out.empty())
        if (const auto dir = env_out_dir()) {
            fs::create_directories(*dir);
            out = (fs::path(*dir) / ("sweep_" + sweep::to_string(spec.mode) + "." + a.format)).string();
        }
    if (out.empty()) {
        if (format == sweep::Format::Csv)
            sweep::write_csv(result, std::cout);
        else
            std::cout << sweep::to_json(result).dump(2) << '\n';
    } else {
        sweep::export_result(result, format, out);
        std::cerr << "wrote " << result.rows.size() << " rows to " << out << '\n';
    }

    if (!result.ok()) {
        for (const auto& e : result.errors)
            std::cerr << "error: v=" << e.velocity_kmh << " ttt=" << e.ttt_ms << " td=" << e.td_ms << ": "
                      << e.message << '\n';
        if (!out.empty()) {
            std::ofstream manifest(out + ".errors.json");
            write_error_manifest(result, manifest);
        }
        return kExitPointFailures;
    }
    return 0;
}

struct HistArgs {
    std::string cases = "1,2,3";
    std::string velocities = "10:120:10";
    std::string ttt_set = "480,160,80,40";
    std::string td = "40,50,200";
    double distance_km = 400.0;
    unsigned traces = 8;
    std::size_t bins = 40;
    std::uint64_t seed = 1;
    std::string radio_config;
    std::string out;
    unsigned workers = 0;
};

int run_histograms_command(const HistArgs& a)
{
    sweep::HistogramJob job;
    if (!a.radio_config.empty())
        job.base_radio = trace::load_radio_config(a.radio_config);
    job.cases.clear();
    for (double c : parse_grid(a.cases)) {
        if (c != 1.0 && c != 2.0 && c != 3.0)
            throw std::invalid_argument("--cases accepts 1, 2, 3");
        job.cases.push_back(static_cast<trace::FadingCase>(static_cast<int>(c)));
    }
    job.velocities = parse_grid(a.velocities);
    job.ttt_ms = parse_grid(a.ttt_set);
    job.td_ms = parse_grid(a.td);
    job.distance_km = a.distance_km;
    job.traces = a.traces;
    job.bins = a.bins;
    job.seed = a.seed;
    job.workers = a.workers;

    std::string out = a.out;
    if (out.empty())
        out = env_out_dir() ? (fs::path(*env_out_dir()) / "histograms").string() : "histograms";
    for (const auto& p : sweep::generate_histograms(job, out))
        std::cout << p << '\n';
    return 0;
}

struct TraceArgs {
    std::string radio_config;
    int fading_case = 3;
    double velocity = 60.0;
    double ttt = 480.0;
    double td = 40.0;
    double duration = 600.0;
    std::uint64_t seed = 1;
    std::string out;
    std::string histogram_out;
    std::size_t bins = 40;
};

int run_trace_command(const TraceArgs& a)
{
    trace::RadioConfig radio;
    if (!a.radio_config.empty())
        radio = trace::load_radio_config(a.radio_config);
    if (a.fading_case < 1 || a.fading_case > 3)
        throw std::invalid_argument("--case accepts 1, 2, 3");
    radio = trace::radio_for_case(static_cast<trace::FadingCase>(a.fading_case), radio);
    radio.l3_coefficient_k = trace::preset_for_ttt(a.ttt).l3_k;
    const auto mob = MobilityConfig::from_kmh_ms(a.velocity, a.ttt, a.ttt, a.td);
    const auto log = trace::run_trace(radio, mob, a.duration, a.seed);

    if (a.out.empty()) {
        trace::write_jsonl(log, std::cout);
    } else {
        std::ofstream f(a.out);
        if (!f)
            throw std::runtime_error("cannot open '" + a.out + "' for writing");
        trace::write_jsonl(log, f);
    }
    if (!a.histogram_out.empty())
        save_histogram(trace::extract_offset_histogram(log, CellGeometry::reference(), a.bins), a.histogram_out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Handover failure and ping-pong analysis for macro/pico deployments"};
    app.require_subcommand(1);

    SweepArgs sa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate HF, NHO and ping-pong metrics over a parameter grid");
    sweep_cmd->add_option("--mode", sa.mode, "analytic | semi-analytic | monte-carlo")->capture_default_str();
    sweep_cmd->add_option("--geometry", sa.geometry, "R,rm,rp in meters")->capture_default_str();
    add_list(sweep_cmd, "--velocities", sa.velocities, "km/h list or start:stop:step");
    add_list(sweep_cmd, "--ttt-set", sa.ttt_set, "TTT values in ms");
    add_list(sweep_cmd, "--td", sa.td, "L3 sampling periods in ms");
    sweep_cmd->add_option("--trials", sa.trials, "Monte Carlo trials per grid point")->capture_default_str();
    sweep_cmd->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
    sweep_cmd->add_option("--histogram", sa.histogram, "Histogram JSON file or directory of per-point files");
    sweep_cmd->add_option("--histogram-case", sa.histogram_case, "Channel case used for directory lookups")
        ->capture_default_str();
    sweep_cmd->add_option("--ping-pong-threshold", sa.ping_pong_threshold, "Seconds")->capture_default_str();
    sweep_cmd->add_option("--offset-mode", sa.offset_mode, "independent | shared")->capture_default_str();
    sweep_cmd->add_option("--out", sa.out, "Output file (default: stdout or $HOFAIL_OUT_DIR)");
    sweep_cmd->add_option("--format", sa.format, "csv | json")->capture_default_str();
    sweep_cmd->add_option("--config", sa.config, "key=value file; its values override flags");
    sweep_cmd->add_option("--workers", sa.workers, "Worker threads (0 = all cores)");

    HistArgs ha;
    auto* hist_cmd = app.add_subcommand("histograms", "Generate offset histograms from radio traces");
    add_list(hist_cmd, "--cases", ha.cases, "Channel cases: 1 none, 2 shadowing, 3 shadowing+fading");
    add_list(hist_cmd, "--velocities", ha.velocities, "km/h");
    add_list(hist_cmd, "--ttt-set", ha.ttt_set, "TTT values in ms (preset filter index)");
    add_list(hist_cmd, "--td", ha.td, "L3 sampling periods in ms");
    hist_cmd->add_option("--distance-km", ha.distance_km, "Distance travelled per histogram")->capture_default_str();
    hist_cmd->add_option("--traces", ha.traces, "Independent traces per histogram")->capture_default_str();
    hist_cmd->add_option("--bins", ha.bins, "Histogram bins")->capture_default_str();
    hist_cmd->add_option("--seed", ha.seed, "Random seed")->capture_default_str();
    hist_cmd->add_option("--radio-config", ha.radio_config, "key=value radio configuration");
    hist_cmd->add_option("--out", ha.out, "Output directory (default: $HOFAIL_OUT_DIR/histograms)");
    hist_cmd->add_option("--workers", ha.workers, "Worker threads (0 = all cores)");

    TraceArgs ta;
    auto* trace_cmd = app.add_subcommand("trace", "Run one radio trace and emit its event log as JSON lines");
    trace_cmd->add_option("--radio-config", ta.radio_config, "key=value radio configuration");
    trace_cmd->add_option("--case", ta.fading_case, "Channel case 1, 2 or 3")->capture_default_str();
    trace_cmd->add_option("--velocity", ta.velocity, "km/h")->capture_default_str();
    trace_cmd->add_option("--ttt", ta.ttt, "TTT in ms (preset filter index)")->capture_default_str();
    trace_cmd->add_option("--td", ta.td, "L3 sampling period in ms")->capture_default_str();
    trace_cmd->add_option("--duration", ta.duration, "Simulated seconds")->capture_default_str();
    trace_cmd->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
    trace_cmd->add_option("--out", ta.out, "Event log path (default: stdout)");
    trace_cmd->add_option("--histogram-out", ta.histogram_out, "Also write the offset histogram here");
    trace_cmd->add_option("--bins", ta.bins, "Histogram bins")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (sweep_cmd->parsed())
            return run_sweep_command(sa);
        if (hist_cmd->parsed())
            return run_histograms_command(ha);
        if (trace_cmd->parsed())
            return run_trace_command(ta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
