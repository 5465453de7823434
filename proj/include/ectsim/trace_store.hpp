#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ectsim/event.hpp"
#include "ectsim/runtime.hpp"

namespace ectsim {

// Everything recorded about one run: the event list, the deduplicated stack
// table, and the run metadata (meta.json).
struct RunMeta {
    std::string run_id;
    std::string program;  // source file name the trace was recorded from
    std::string policy;
    std::uint64_t seed = 0;
    double yield_probability = 0.0;
    int delay_bound = 0;
    std::int64_t max_steps = 0;
    std::string outcome;
    std::int64_t steps = 0;
    std::vector<std::int64_t> outputs;

    bool operator==(const RunMeta&) const = default;
};

struct TraceBundle {
    RunMeta meta;
    std::vector<Event> events;
    StackTable stacks;
};

TraceBundle make_bundle(const RunResult& result, const std::string& run_id,
                        const std::string& program, const SchedulerConfig& config);

// Writes events.csv, stack_frames.csv, arguments.csv and meta.json into `dir`.
// Writes are atomic (tmp file + rename). Throws std::runtime_error if the
// directory already holds a trace and `force` is false.
void save_bundle(const TraceBundle& bundle, const std::filesystem::path& dir, bool force = false);

// Loads a bundle saved by save_bundle. Malformed rows and broken references
// between tables raise std::runtime_error naming the file and line.
TraceBundle load_bundle(const std::filesystem::path& dir);

// Query helpers.
std::vector<const Event*> events_by_goroutine(const TraceBundle& b, int g);
const Event* final_event(const TraceBundle& b, int g);  // nullptr if none
std::vector<const Event*> events_of_kind(const TraceBundle& b, EventKind k);
std::vector<const Event*> events_on_resource(const TraceBundle& b, ResKind rk, int res_id);

}  // namespace ectsim
