#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ectsim/analyzers.hpp"
#include "ectsim/runtime.hpp"

namespace ectsim {

struct FuzzConfig {
    int iterations = 1000;             // delay-injection iterations after the baseline
    std::uint64_t base_seed = 0;       // iteration i runs with seed base_seed + i
    double yield_probability = 0.25;
    int delay_bound = 5;
    std::int64_t max_steps = 1'000'000;
    bool stop_on_first_bug = true;
    std::optional<std::int64_t> arg0;
};

// What a run means for bug hunting.
enum class FuzzOutcome { Clean, Leak, GlobalDeadlock, Fault, Timeout };

const char* fuzz_outcome_name(FuzzOutcome o);

// Leaks are judged post-mortem; deadlock/fault/timeout come from the runtime.
FuzzOutcome classify_outcome(const RunResult& result);

struct IterationRecord {
    int iteration = 0;  // 0 = baseline run
    std::uint64_t seed = 0;
    FuzzOutcome outcome = FuzzOutcome::Clean;
    std::int64_t steps = 0;
    size_t critical_points = 0;  // cumulative pool size after this iteration
};

struct FuzzReport {
    std::vector<IterationRecord> iterations;
    std::optional<int> first_bug_iteration;
    FuzzOutcome first_bug = FuzzOutcome::Clean;
    // The full result of the first buggy run, for post-mortem analysis.
    std::optional<RunResult> bug_result;

    bool found_bug() const { return first_bug_iteration.has_value(); }
};

// Iteration 0 runs the cooperative baseline scheduler to harvest critical
// points; later iterations perturb schedules around them with delay
// injection. Deterministic for a fixed (program, config).
FuzzReport fuzz(const Program& program, const FuzzConfig& config);

}  // namespace ectsim
