#include "ectsim/coverage.hpp"

#include <stdexcept>

namespace ectsim {

namespace {

SourceLoc loc_of(const TraceBundle& b, const Event& e) {
    const StackFrame& f = b.stacks.get(e.stack_id).front();
    return {f.file, f.line, 1};
}

}  // namespace

CoverageSet coverage_of(const TraceBundle& b) {
    CoverageSet cov;
    cov.program = b.meta.program;

    for (const SyncEdge& e : sync_edges(b)) {
        if (e.kind == SyncEdgeKind::CreateStart) continue;
        cov.sync_pairs.insert({loc_of(b, b.events[static_cast<size_t>(e.from)]),
                               loc_of(b, b.events[static_cast<size_t>(e.to)])});
    }

    std::map<int, SourceLoc> last_pre;        // goroutine -> open pre location
    std::map<int, SourceLoc> mutex_hold_loc;  // mutex -> owner's MU_LOCK_POST location
    for (const Event& e : b.events) {
        if (is_pre_event(e.kind)) last_pre[e.g] = loc_of(b, e);
        if (e.kind == EventKind::MuLockPost) mutex_hold_loc[e.resource->second] = loc_of(b, e);

        if (e.kind == EventKind::GoBlock) {
            auto it = last_pre.find(e.g);
            if (it != last_pre.end()) {
                cov.blocking_blocked.insert({it->second, "BLOCKED"});
                if (e.resource && e.resource->first == ResKind::Mutex) {
                    auto hold = mutex_hold_loc.find(e.resource->second);
                    if (hold != mutex_hold_loc.end())
                        cov.blocked_pairs.insert({it->second, hold->second});
                }
            }
        } else if (e.kind == EventKind::GoUnblock && e.aux) {
            const Event& trigger = b.events[static_cast<size_t>(*e.aux)];
            cov.blocking_blocked.insert({loc_of(b, trigger), "BLOCKING"});
        }
    }
    return cov;
}

CoverageSet merge(const CoverageSet& a, const CoverageSet& b) {
    if (a.program != b.program)
        throw std::invalid_argument("cannot merge coverage of '" + a.program + "' and '" +
                                    b.program + "'");
    CoverageSet out = a;
    out.sync_pairs.insert(b.sync_pairs.begin(), b.sync_pairs.end());
    out.blocking_blocked.insert(b.blocking_blocked.begin(), b.blocking_blocked.end());
    out.blocked_pairs.insert(b.blocked_pairs.begin(), b.blocked_pairs.end());
    return out;
}

std::vector<size_t> growth_curve(const std::vector<CoverageSet>& runs) {
    std::vector<size_t> curve;
    if (runs.empty()) return curve;
    CoverageSet acc = runs.front();
    curve.push_back(acc.total());
    for (size_t i = 1; i < runs.size(); i++) {
        acc = merge(acc, runs[i]);
        curve.push_back(acc.total());
    }
    return curve;
}

}  // namespace ectsim
