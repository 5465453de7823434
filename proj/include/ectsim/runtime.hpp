#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ectsim/ast.hpp"
#include "ectsim/event.hpp"

namespace ectsim {

enum class SchedPolicy { Fifo, Random, DelayInject };

const char* sched_policy_name(SchedPolicy p);
std::optional<SchedPolicy> sched_policy_from_name(const std::string& s);

struct SchedulerConfig {
    SchedPolicy policy = SchedPolicy::Fifo;
    std::uint64_t seed = 0;
    double yield_probability = 0.25;       // DELAY_INJECT only
    int delay_bound = 5;                   // DELAY_INJECT only
    std::set<SourceLoc> critical_points;   // DELAY_INJECT only; matched by (file, line)
    std::int64_t max_steps = 1'000'000;    // watchdog bound on scheduler decisions
};

enum class RunStatus { Completed, GlobalDeadlock, Fault, WatchdogTimeout };

enum class FaultKind {
    SendOnClosed,
    CloseOfClosed,
    UnlockNotOwner,
    NegativeWgCounter,
    CvWaitWithoutLock,
    DivisionByZero,
};

const char* fault_kind_name(FaultKind k);

struct Fault {
    FaultKind kind;
    SourceLoc loc;
    int g = 0;
};

enum class GoStatus { Runnable, Blocked, Done, Killed };

const char* go_status_name(GoStatus s);

struct RunOutcome {
    RunStatus status = RunStatus::Completed;
    std::optional<Fault> fault;
    std::map<int, GoStatus> final_status;
    std::int64_t steps = 0;
    std::vector<std::int64_t> outputs;  // values received into OUT by main

    std::string status_str() const;
};

struct RunResult {
    std::vector<Event> events;
    StackTable stacks;
    RunOutcome outcome;
};

// Deterministically interprets a checked program, emitting the ECT.
// All abnormal endings are encoded in the outcome; never throws for
// program-level misbehavior.
RunResult run(const Program& program, const SchedulerConfig& config,
              std::optional<std::int64_t> arg0 = std::nullopt);

}  // namespace ectsim
