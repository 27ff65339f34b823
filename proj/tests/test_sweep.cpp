#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <hofail/sweep.hpp>

#include "oracles.hpp"

using namespace hofail;
using namespace hofail::sweep;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("hofail_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double value_of(const SweepResult& r, double v, double ttt, double td, const std::string& metric)
{
    for (const auto& row : r.rows)
        if (row.velocity_kmh == v && row.ttt_ms == ttt && row.td_ms == td && row.metric == metric)
            return row.value;
    ADD_FAILURE() << "missing row " << v << " " << ttt << " " << td << " " << metric;
    return NAN;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(HOFAIL_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(SweepSpec, Validation)
{
    SweepSpec s;
    EXPECT_NO_THROW(s.validate());
    s.velocities.clear();
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.mode = Mode::SemiAnalytic;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.histogram_path = "x.json";
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.mode = Mode::MonteCarlo;
    s.trials = 100;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    EXPECT_EQ(mode_from_string("semi-analytic"), Mode::SemiAnalytic);
    EXPECT_THROW(mode_from_string("exact"), std::invalid_argument);
}

TEST(RunSweep, DefaultAnalyticGrid)
{
    const auto r = run_sweep(SweepSpec{});
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.rows.size(), 12u * 4u * 3u * 3u);
    for (const auto& row : r.rows) {
        ASSERT_GE(row.value, 0.0);
        ASSERT_LE(row.value, 1.0);
        EXPECT_FALSE(row.ci.has_value());
        if (row.ttt_ms == 160.0 && row.metric == "pue_hf")
            EXPECT_NEAR(row.value, 0.0, 0.002) << row.velocity_kmh << " " << row.td_ms;
    }
    for (std::size_t i = 1; i < r.rows.size(); ++i)
        EXPECT_LT(r.rows[i - 1].key(), r.rows[i].key());
}

TEST(RunSweep, ZeroVelocityHasNoFailures)
{
    for (auto mode : {Mode::Analytic, Mode::MonteCarlo}) {
        SweepSpec s;
        s.mode = mode;
        s.velocities = {0.0};
        s.trials = 20'000;
        const auto r = run_sweep(s);
        ASSERT_TRUE(r.ok());
        for (const auto& row : r.rows)
            if (row.metric != "ping_pong")
                EXPECT_EQ(row.value, 0.0) << row.metric;
    }
}

TEST(RunSweep, MonteCarloMatchesAnalytic)
{
    SweepSpec a;
    a.velocities = {30, 60, 90, 120};
    SweepSpec m = a;
    m.mode = Mode::MonteCarlo;
    m.trials = 400'000;
    m.offset_mode = mc::OffsetMode::Shared;
    const auto ra = run_sweep(a);
    const auto rm = run_sweep(m);
    for (const auto& row : rm.rows) {
        if (row.metric == "ping_pong")
            continue;
        const double ref = value_of(ra, row.velocity_kmh, row.ttt_ms, row.td_ms, row.metric);
        EXPECT_LE(std::abs(row.value - ref), 0.005 + *row.ci) << row.metric << " " << row.velocity_kmh;
    }
}

TEST(RunSweep, PointErrorsAreCollected)
{
    const auto dir = scratch("errs");
    SweepSpec s;
    s.mode = Mode::SemiAnalytic;
    s.velocities = {60, 120};
    s.ttt_ms = {480};
    s.td_ms = {40};
    s.histogram_path = dir.string();
    save_histogram(Histogram({0.0, 1.0}, {1.0}), (dir / histogram_file_name(3, 60, 480, 40)).string());
    const auto r = run_sweep(s);
    EXPECT_EQ(r.rows.size(), 3u);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0].velocity_kmh, 120.0);
}

TEST(Export, CsvHeaderAndEmptyResult)
{
    std::ostringstream empty;
    write_csv(SweepResult{}, empty);
    EXPECT_EQ(empty.str(), "velocity_kmh,ttt_ms,td_ms,metric,value,ci\n");

    SweepResult r;
    r.rows.push_back({60, 480, 50, "mue_hf", 0.125, std::nullopt});
    r.rows.push_back({60, 480, 50, "ping_pong", 0.25, 0.001});
    std::ostringstream out;
    write_csv(r, out);
    EXPECT_EQ(out.str(), "velocity_kmh,ttt_ms,td_ms,metric,value,ci\n60,480,50,mue_hf,0.125,\n"
                         "60,480,50,ping_pong,0.25,0.001\n");
}

TEST(Export, JsonRoundTripIsIdentical)
{
    SweepSpec s;
    s.mode = Mode::MonteCarlo;
    s.velocities = {50, 110};
    s.ttt_ms = {80};
    s.td_ms = {150};
    s.trials = 20'000;
    const auto r = run_sweep(s);
    const auto dir = scratch("json");
    const auto p1 = (dir / "a.json").string();
    const auto p2 = (dir / "b.json").string();
    export_result(r, Format::Json, p1);
    const auto back = load_json_result(p1);
    export_result(back, Format::Json, p2);
    EXPECT_EQ(slurp(p1), slurp(p2));
    ASSERT_EQ(back.rows.size(), r.rows.size());
    EXPECT_TRUE(back.rows[0].ci.has_value() || back.rows[0].metric != "ping_pong");
}

TEST(GenerateHistograms, DeterministicAndCaseShapes)
{
    HistogramJob job;
    job.cases = {trace::FadingCase::Case1, trace::FadingCase::Case3};
    job.velocities = {120};
    job.ttt_ms = {480};
    job.td_ms = {40};
    job.distance_km = 400;
    job.traces = 2;
    job.bins = 20;
    job.workers = 2;
    const auto d1 = scratch("hist1");
    const auto d2 = scratch("hist2");
    const auto p1 = generate_histograms(job, d1.string());
    const auto p2 = generate_histograms(job, d2.string());
    ASSERT_EQ(p1.size(), 2u);
    for (std::size_t i = 0; i < p1.size(); ++i)
        EXPECT_EQ(slurp(p1[i]), slurp(p2[i]));
    const auto case3 = load_histogram((d1 / histogram_file_name(3, 120, 480, 40)).string());
    EXPECT_LT(case3.support_min(), 0.0);
}

TEST(GenerateHistograms, CaseOneIsUniformOverSamplingTravel)
{
    const auto m = MobilityConfig::from_kmh_ms(60, 480, 480, 200);
    auto radio = trace::radio_for_case(trace::FadingCase::Case1);
    radio.l3_coefficient_k = 4;
    const auto offsets = collect_offsets(radio, m, 300, 3, 77, 0);
    EXPECT_GT(oracle::chi_square_uniform_p(offsets, 0.0, m.sampling_travel(), 10), 0.01);
}

TEST(Cli, SweepCsvToFile)
{
    const auto dir = scratch("cli_csv");
    const auto out = dir / "a.csv";
    ASSERT_EQ(run_cli("sweep --mode analytic --velocities 10:30:10 --ttt-set 480 160 --td 50 --out " + out.string()),
              0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "velocity_kmh,ttt_ms,td_ms,metric,value,ci");
    int lines = 0;
    for (std::string l; std::getline(in, l);)
        ++lines;
    EXPECT_EQ(lines, 3 * 2 * 1 * 3);
}

TEST(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(run_cli("sweep --mode bogus > /dev/null 2>&1"), 1);
    EXPECT_EQ(run_cli("sweep --mode semi-analytic > /dev/null 2>&1"), 1);
    EXPECT_EQ(run_cli("sweep --mode analytic --geometry 64,70,78 > /dev/null 2>&1"), 1);
}

TEST(Cli, PointErrorsWriteManifestAndExitTwo)
{
    const auto dir = scratch("cli_err");
    save_histogram(Histogram({0.0, 1.0}, {1.0}), (dir / histogram_file_name(3, 60, 480, 40)).string());
    const auto out = dir / "r.json";
    const int code = run_cli("sweep --mode semi-analytic --velocities 60 120 --ttt-set 480 --td 40 --histogram "
                             + dir.string() + " --format json --out " + out.string() + " 2> /dev/null");
    EXPECT_EQ(code, 2);
    EXPECT_TRUE(fs::exists(out.string() + ".errors.json"));
    EXPECT_EQ(load_json_result(out.string()).rows.size(), 3u);
}

TEST(Cli, TraceAndHistogramCommands)
{
    const auto dir = scratch("cli_trace");
    ASSERT_EQ(run_cli("trace --case 3 --velocity 120 --ttt 480 --td 40 --duration 3000 --seed 4 --out "
                      + (dir / "log.jsonl").string() + " --histogram-out " + (dir / "h.json").string()),
              0);
    EXPECT_NO_THROW(load_histogram((dir / "h.json").string()));
    std::ifstream in(dir / "log.jsonl");
    EXPECT_NO_THROW(trace::read_jsonl(in));

    ASSERT_EQ(run_cli("histograms --cases 1 --velocities 90 --ttt-set 160 --td 200 --distance-km 300 --traces 1 "
                      "--out " + (dir / "hists").string() + " > /dev/null"),
              0);
    EXPECT_TRUE(fs::exists(dir / "hists" / histogram_file_name(1, 90, 160, 200)));
}
