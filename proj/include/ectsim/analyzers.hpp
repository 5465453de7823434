#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ectsim/ast.hpp"
#include "ectsim/trace_store.hpp"

namespace ectsim {

// ---------------------------------------------------------------------------
// Goroutine classification
// ---------------------------------------------------------------------------

enum class GoClass { Runtime, Application };

struct Classification {
    std::map<int, GoClass> classes;       // goroutine id -> class
    std::map<int, int> parent;            // goroutine id -> creator (absent for g0)
    std::map<int, std::string> function;  // goroutine id -> entry function name
    std::vector<std::string> errors;      // orphans, double-creates
};

Classification classify(const TraceBundle& b);

// ---------------------------------------------------------------------------
// Leak detection
// ---------------------------------------------------------------------------

enum class LeakKind { Blocked, Killed };

struct Leak {
    int g = 0;
    std::string function;
    LeakKind kind = LeakKind::Blocked;
    std::string reason;                                   // SEND/RECV/LOCK/... (Blocked only)
    std::optional<std::pair<ResKind, int>> resource;      // absent for select blocks
    std::optional<int> holder;                            // mutex holder (LOCK blocks)
    SourceLoc loc;                                        // where the goroutine stopped
};

struct LeakReport {
    std::vector<Leak> leaks;
    bool clean() const { return leaks.empty(); }
};

LeakReport detect_leaks(const TraceBundle& b);

// Per-kind display label: first channel is C1, first mutex M1, and so on.
std::string resource_label(const TraceBundle& b, ResKind rk, int res_id);

std::string describe(const TraceBundle& b, const Leak& l);

// ---------------------------------------------------------------------------
// Wait-for graph and cycles
// ---------------------------------------------------------------------------

struct WfgNode {
    bool is_goroutine = true;
    int g = 0;
    ResKind rk = ResKind::Chan;
    int res_id = 0;
    auto operator<=>(const WfgNode&) const = default;
};

enum class WfgEdgeKind { Waits, HeldBy, Counterpart };

struct WfgEdge {
    WfgNode from, to;
    WfgEdgeKind kind = WfgEdgeKind::Waits;
    auto operator<=>(const WfgEdge&) const = default;
};

struct WaitForGraph {
    std::set<WfgNode> nodes;
    std::set<WfgEdge> edges;
};

WaitForGraph build_waitfor(const TraceBundle& b);

// Simple cycles through the graph; each cycle is a node sequence starting at
// its smallest node, without repeating the start at the end.
std::vector<std::vector<WfgNode>> find_cycles(const WaitForGraph& g);

std::string wfg_node_label(const TraceBundle& b, const WfgNode& n);

// ---------------------------------------------------------------------------
// Happens-before
// ---------------------------------------------------------------------------

enum class SyncEdgeKind { CreateStart, ChanPair, Close, Mutex, Wg, Cv };

struct SyncEdge {
    int from = 0, to = 0;  // event ids, from < to
    SyncEdgeKind kind = SyncEdgeKind::ChanPair;
    auto operator<=>(const SyncEdge&) const = default;
};

// Cross-goroutine synchronization edges evidenced by the trace.
std::vector<SyncEdge> sync_edges(const TraceBundle& b);

// One clock per event, indexed by goroutine id.
using VectorClock = std::map<int, std::int64_t>;

std::vector<VectorClock> vector_clocks(const TraceBundle& b);

// a happens-before b under pointwise clock comparison.
bool hb_leq(const VectorClock& a, const VectorClock& b);

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

std::string export_shiviz(const TraceBundle& b);
std::string export_dot(const TraceBundle& b, const WaitForGraph& g);
std::string lane_view(const TraceBundle& b);

// ---------------------------------------------------------------------------
// Critical points and trace lint
// ---------------------------------------------------------------------------

// Distinct source locations of concurrency-category events, ordered.
std::vector<SourceLoc> critical_points(const TraceBundle& b);

// Structural checks on the trace: pre/post pairing, block/unblock discipline,
// monotone timestamps. Returns human-readable violations (empty = clean).
std::vector<std::string> lint_trace(const TraceBundle& b);

}  // namespace ectsim
