#include "ectsim/fuzzer.hpp"

namespace ectsim {

const char* fuzz_outcome_name(FuzzOutcome o) {
    switch (o) {
        case FuzzOutcome::Clean: return "CLEAN";
        case FuzzOutcome::Leak: return "LEAK";
        case FuzzOutcome::GlobalDeadlock: return "GLOBAL_DEADLOCK";
        case FuzzOutcome::Fault: return "FAULT";
        case FuzzOutcome::Timeout: return "TIMEOUT";
    }
    return "?";
}

FuzzOutcome classify_outcome(const RunResult& result) {
    switch (result.outcome.status) {
        case RunStatus::GlobalDeadlock: return FuzzOutcome::GlobalDeadlock;
        case RunStatus::Fault: return FuzzOutcome::Fault;
        case RunStatus::WatchdogTimeout: return FuzzOutcome::Timeout;
        case RunStatus::Completed: break;
    }
    TraceBundle b = make_bundle(result, "fuzz", "", SchedulerConfig{});
    return detect_leaks(b).clean() ? FuzzOutcome::Clean : FuzzOutcome::Leak;
}

FuzzReport fuzz(const Program& program, const FuzzConfig& config) {
    FuzzReport report;
    std::set<SourceLoc> pool;

    auto record = [&](int iter, std::uint64_t seed, RunResult result) {
        TraceBundle b = make_bundle(result, "fuzz", program.file, SchedulerConfig{});
        for (const SourceLoc& loc : critical_points(b)) pool.insert(loc);
        FuzzOutcome out = classify_outcome(result);
        report.iterations.push_back({iter, seed, out, result.outcome.steps, pool.size()});
        if (out != FuzzOutcome::Clean && !report.first_bug_iteration) {
            report.first_bug_iteration = iter;
            report.first_bug = out;
            report.bug_result = std::move(result);
        }
    };

    SchedulerConfig base;
    base.policy = SchedPolicy::Fifo;
    base.seed = config.base_seed;
    base.max_steps = config.max_steps;
    record(0, base.seed, run(program, base, config.arg0));
    if (report.found_bug() && config.stop_on_first_bug) return report;

    for (int i = 1; i <= config.iterations; i++) {
        SchedulerConfig cfg;
        cfg.policy = SchedPolicy::DelayInject;
        cfg.seed = config.base_seed + static_cast<std::uint64_t>(i);
        cfg.yield_probability = config.yield_probability;
        cfg.delay_bound = config.delay_bound;
        cfg.max_steps = config.max_steps;
        cfg.critical_points = pool;
        record(i, cfg.seed, run(program, cfg, config.arg0));
        if (report.found_bug() && config.stop_on_first_bug) return report;
    }
    return report;
}

}  // namespace ectsim
