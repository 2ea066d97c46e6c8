// Batch front end: one subcommand per experiment kind.
//
//   bubblelab correction-sweep --config configs/examples/correction_2d.cfg --out runs/c5 --threads 4
//   bubblelab help-config
//
// Exit status: 0 pass, 1 thresholds not met, 2 module failure, 3 bad config or usage.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <regex>
#include <string>

#include "bubblelab/error.hpp"
#include "bubblelab/io/config.hpp"
#include "bubblelab/io/runner.hpp"

namespace io = bubblelab::io;

int main(int argc, char** argv) {
    CLI::App app{"bubblelab: concentrating solutions in punctured domains, numerically"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    bool quiet = false;

    for (const auto& name : io::kind_names()) {
        CLI::App* sub = app.add_subcommand(name, "run a " + name + " experiment");
        sub->add_option("--config", config_path, "key = value experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (created if missing)")->required();
        sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_flag("--quiet", quiet, "no progress lines");
    }
    app.add_subcommand("help-config", "list every config key with its default");

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() == "help-config") {
        std::cout << io::help_config();
        return 0;
    }

    try {
        std::string text = io::read_file(config_path);
        static const std::regex has_kind(R"((^|\n)[ \t]*experiment[ \t]*=)");
        if (!std::regex_search(text, has_kind)) text = "experiment = " + sub->get_name() + "\n" + text;
        io::ExperimentConfig cfg = io::parse_config(text);
        if (io::to_string(cfg.kind) != sub->get_name()) {
            std::cerr << "config names experiment '" << io::to_string(cfg.kind) << "' but the subcommand is '"
                      << sub->get_name() << "'\n";
            return 3;
        }
        io::RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        if (sub->count("--seed")) opts.seed = seed;
        if (!quiet) opts.log = [](const std::string& s) { std::cerr << "[bubblelab] " << s << "\n"; };
        io::RunOutcome r = io::run(cfg, opts);
        if (r.failed) std::cerr << "module failure: " << r.error << "\n";
        std::cout << io::to_string(cfg.kind) << ": " << (r.pass ? "PASS" : (r.failed ? "FAILED" : "FAIL")) << "\n";
        return io::exit_status(r);
    } catch (const bubblelab::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
