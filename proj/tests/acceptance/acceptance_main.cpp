// Acceptance driver. Runs the configs in configs/acceptance against pinned
// thresholds and prints one PASS/FAIL line per criterion.
//
//   bubblelab_acceptance --configs configs/acceptance --out build/acceptance            # all
//   bubblelab_acceptance --configs ... --out ... --criterion 5                          # one
//
// Every config is run twice, with 1 and with 8 worker threads; the byte
// comparison of the two output sets is recorded under <out>/determinism and
// read back by criterion 11, so the suite never runs a config more than twice.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bubblelab/io/config.hpp"
#include "bubblelab/io/output.hpp"
#include "bubblelab/io/runner.hpp"

namespace fs = std::filesystem;
namespace io = bubblelab::io;
using json = nlohmann::json;

namespace {

// Thresholds of the acceptance suite. They override whatever the config files
// say so a config cannot loosen a criterion.
io::Tolerances pinned() {
    io::Tolerances t;
    t.identity = 1e-12;
    t.order_target = 2.0;
    t.order_band = 0.2;
    t.greens = 1e-3;
    t.newtonian = 1e-6;
    t.slope = 0.10;
    t.expansion = 0.05;
    t.grad = 1e-10;
    t.grad_fd = 1e-6;
    t.multiplicativity = 1e-12;
    t.dilation = 1e-10;
    t.transfer = 1e-5;
    t.factor = 0.05;
    t.meridian_equal = 1e-5;
    t.meridian_generic = 1e-3;
    return t;
}

struct Criterion {
    int id;
    const char* title;
    std::vector<const char*> configs;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> c = {
        {1, "bubble identities and discrete Laplacian order", {"c01_bubble_identities"}},
        {2, "kernel identity", {"c02_kernel"}},
        {3, "Green's function regular part on the unit ball", {"c03_greens"}},
        {4, "Newtonian potential identity for g", {"c04_newtonian"}},
        {5, "correction norm slope (n-2)/(n-1)", {"c05a_correction_meridian", "c05b_correction_ball3d"}},
        {6, "energy expansion against Q^{-2/(p-1)} F", {"c06_expansion"}},
        {7, "nondegenerate critical point of F", {"c07_critical_point"}},
        {8, "concentration under Newton continuation", {"c08_concentration"}},
        {9, "Hopf map identities", {"c09_hopf"}},
        {10, "meridian equation necessity", {"c10_meridian"}},
    };
    return c;
}

const char* kCompared[] = {"config.cfg", "results.csv", "summary.json", "manifest.json"};

// One-line digest of a summary for the report.
std::string digest(const std::string& name, const io::RunOutcome& r) {
    if (r.failed) return name + ": module failure: " + r.error;
    json s = json::parse(r.summary_json);
    std::ostringstream os;
    os << name << ": " << (r.pass ? "pass" : "fail");
    if (s.contains("fits"))
        for (const auto& f : s["fits"])
            os << " slope=" << f["slope"].dump() << " (target " << f["target"].dump()
               << ", decade=" << f["spans_decade"].dump() << ", collapsed=" << f["collapsed"].dump() << ")";
    if (s.contains("points"))
        for (const auto& p : s["points"]) os << " rel_err=" << (p.contains("rel_error") ? p["rel_error"].dump() : "n/a");
    if (s.contains("peak_slope"))
        os << " peak_slope=" << s["peak_slope"].dump() << " converged=" << s["all_converged"].dump()
           << " located=" << s["all_locations_ok"].dump();
    return os.str();
}

struct ConfigResult {
    bool pass = false;
    bool identical = false;
    std::string line;
    std::string determinism;
};

ConfigResult run_config(const fs::path& cfg_path, const fs::path& out, int threads_b) {
    const std::string name = cfg_path.stem().string();
    ConfigResult res;
    io::ExperimentConfig cfg;
    try {
        cfg = io::load_config(cfg_path.string());
    } catch (const std::exception& e) {
        res.line = name + ": config error: " + e.what();
        res.determinism = "config error";
        return res;
    }
    cfg.tol = pinned();
    const fs::path a = out / "threads1" / name, b = out / ("threads" + std::to_string(threads_b)) / name;
    io::RunOptions oa, ob;
    oa.out_dir = a.string();
    oa.threads = 1;
    ob.out_dir = b.string();
    ob.threads = threads_b;
    const auto t0 = std::chrono::steady_clock::now();
    io::RunOutcome ra = io::run(cfg, oa);
    const auto t1 = std::chrono::steady_clock::now();
    io::run(cfg, ob);
    res.pass = ra.pass && !ra.failed;
    char secs[32];
    std::snprintf(secs, sizeof secs, " [%.1f s]", std::chrono::duration<double>(t1 - t0).count());
    res.line = digest(name, ra) + secs;

    res.identical = true;
    for (const char* f : kCompared) {
        if (io::read_file((a / f).string()) != io::read_file((b / f).string())) {
            res.identical = false;
            res.determinism += std::string(res.determinism.empty() ? "differs:" : "") + " " + f;
        }
    }
    if (res.identical) res.determinism = "identical";
    fs::create_directories(out / "determinism");
    io::write_file((out / "determinism" / (name + ".txt")).string(), res.determinism + "\n");
    return res;
}

void print_line(int id, const char* title, bool pass) {
    std::printf("C%-2d %-52s %s\n", id, title, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::string configs_dir, out_dir;
    std::vector<int> only;
    int threads_b = 8;
    app.add_option("--configs", configs_dir, "directory with the acceptance configs")->required()->check(CLI::ExistingDirectory);
    app.add_option("--out", out_dir, "scratch directory for run outputs")->required();
    app.add_option("--criterion", only, "run only these criteria (1..11)")->check(CLI::Range(1, 11));
    app.add_option("--threads", threads_b, "thread count of the second run")->check(CLI::Range(2, 256));
    CLI11_PARSE(app, argc, argv);

    const fs::path cdir(configs_dir), out(out_dir);
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    bool all = true;

    for (const auto& c : criteria()) {
        if (!wanted(c.id)) continue;
        bool pass = true;
        std::vector<std::string> details;
        for (const char* name : c.configs) {
            ConfigResult r = run_config(cdir / (std::string(name) + ".cfg"), out, threads_b);
            pass = pass && r.pass;
            details.push_back(r.line);
        }
        print_line(c.id, c.title, pass);
        for (const auto& d : details) std::printf("      %s\n", d.c_str());
        all = all && pass;
    }

    if (wanted(11)) {
        // Reuse records of configs already run by this or an earlier invocation.
        bool identical = true;
        std::vector<std::string> details;
        for (const auto& c : criteria()) {
            for (const char* name : c.configs) {
                const fs::path rec = out / "determinism" / (std::string(name) + ".txt");
                std::string verdict;
                if (fs::exists(rec)) {
                    verdict = io::read_file(rec.string());
                    if (!verdict.empty() && verdict.back() == '\n') verdict.pop_back();
                } else {
                    verdict = run_config(cdir / (std::string(name) + ".cfg"), out, threads_b).determinism;
                }
                identical = identical && verdict == "identical";
                details.push_back(std::string(name) + ": " + verdict);
            }
        }
        print_line(11, ("byte-identical outputs, 1 vs " + std::to_string(threads_b) + " threads").c_str(), identical);
        for (const auto& d : details) std::printf("      %s\n", d.c_str());
        all = all && identical;
    }
    return all ? 0 : 1;
}
