#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "bubblelab/io/config.hpp"
#include "bubblelab/io/output.hpp"

namespace bubblelab::io {

struct RunOptions {
    std::string out_dir;                 // empty: keep everything in memory
    int threads = 1;
    std::optional<std::uint64_t> seed;   // overrides the config seed
    std::function<void(const std::string&)> log;  // progress lines; never part of outputs
};

struct RunOutcome {
    bool pass = false;
    bool failed = false;       // a module raised; outputs are partial
    std::string error;
    std::string csv;
    std::string summary_json;
    std::string canonical_config;
    RunManifest manifest;
};

/// Execute one experiment. Never throws for module failures; they are
/// reported through `failed` and a FAILED marker file in out_dir.
RunOutcome run(ExperimentConfig cfg, const RunOptions& opts);

/// 0 pass, 1 thresholds not met, 2 module failure.
int exit_status(const RunOutcome& r);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to slot i by the caller, which keeps aggregation order-fixed. The
/// exception of the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace bubblelab::io
