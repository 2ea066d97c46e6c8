#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bubblelab/io/config.hpp"
#include "bubblelab/io/output.hpp"
#include "bubblelab/io/runner.hpp"

using namespace bubblelab::io;
namespace fs = std::filesystem;

namespace {

const char* kSweep =
    "experiment = correction-sweep\n"
    "n = 3\ngroup = orthogonal\ngroup.m = 2\nmeridian = true\n"
    "q = affine\nq.slope = 0.5,0,0\n"
    "h = 0.03125\neps = 0.125,0.15,0.2,0.25\neps_max_factor = 0.3\n"
    "d = 1,0.9\neta = 0,0,0 ; -0.05,0,0\n";

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bubblelab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST(Runner, OutputsDoNotDependOnThreadCount) {
    const ExperimentConfig cfg = parse_config(kSweep);
    RunOptions o1, o4;
    o1.threads = 1;
    o4.threads = 4;
    RunOutcome a = run(cfg, o1), b = run(cfg, o4);
    ASSERT_FALSE(a.failed) << a.error;
    EXPECT_EQ(a.csv, b.csv);
    EXPECT_EQ(a.summary_json, b.summary_json);
    EXPECT_EQ(a.manifest.json(), b.manifest.json());
}

// The log-log slope in the summary is reproducible from the CSV rows alone.
TEST(Runner, CorrectionSweepSlopeFromCsv) {
    RunOutcome r = run(parse_config(kSweep), {});
    ASSERT_FALSE(r.failed) << r.error;
    auto rows = parse_csv(r.csv);
    ASSERT_EQ(rows.size(), 1u + 4u * 2u);
    const auto& head = rows[0];
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    const auto summary = nlohmann::json::parse(r.summary_json);
    for (int point = 0; point < 2; ++point) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (std::stoi(rows[i][col("point")]) != point || rows[i][col("converged")] != "1") continue;
            const double lx = std::log(std::stod(rows[i][col("eps")]));
            const double ly = std::log(std::stod(rows[i][col("phi_norm")]));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            m += 1;
        }
        ASSERT_EQ(m, 4);
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const auto& fit = summary["fits"][point];
        EXPECT_NEAR(fit["slope"].get<double>(), slope, 1e-12 * std::abs(slope));
        EXPECT_FALSE(fit["spans_decade"].get<bool>());  // eps spans a factor 2 only
    }
    EXPECT_FALSE(r.pass);
}

TEST(Runner, WritesArtifactsAndHashes) {
    const fs::path dir = scratch("hopf");
    RunOptions o;
    o.out_dir = dir.string();
    RunOutcome r = run(parse_config("experiment = hopf-check\nhopf.dims = 4\nhopf.samples = 16\n"), o);
    EXPECT_TRUE(r.pass) << r.summary_json;
    EXPECT_EQ(exit_status(r), 0);
    for (const char* f : {"config.cfg", "results.csv", "summary.json", "manifest.json", "timings.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_FALSE(fs::exists(dir / "FAILED"));
    const auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
    for (const auto& f : manifest["files"])
        EXPECT_EQ(f["sha256"].get<std::string>(), sha256_hex(read_file((dir / f["name"].get<std::string>()).string())));
    EXPECT_EQ(manifest["config_sha256"].get<std::string>(), sha256_hex(read_file((dir / "config.cfg").string())));
    fs::remove_all(dir);
}

TEST(Runner, ModuleFailureLeavesMarker) {
    const fs::path dir = scratch("failed");
    RunOptions o;
    o.out_dir = dir.string();
    // bypass validation: a pole outside the domain makes the module itself raise
    ExperimentConfig cfg = parse_config("experiment = greens\nh = 0.0625\n");
    cfg.poles = {{2.0, 0.0, 0.0}};
    RunOutcome bad = run(cfg, o);
    EXPECT_TRUE(bad.failed);
    EXPECT_EQ(exit_status(bad), 2);
    EXPECT_TRUE(fs::exists(dir / "FAILED"));
    fs::remove_all(dir);
}

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Csv, FormatsRealsExactly) {
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(NAN), "nan");
    EXPECT_DOUBLE_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}
