#pragma once

#include <set>
#include <string>
#include <vector>

#include "ectsim/analyzers.hpp"
#include "ectsim/trace_store.hpp"

namespace ectsim {

// Synchronization coverage observed by one or more runs of the same program.
struct CoverageSet {
    std::string program;

    // Ordered pairs of source locations whose events synchronized (channel
    // pairing, close delivery, mutex hand-off, wg release, cond wake).
    // Creation->start edges are excluded: they say nothing about sync usage.
    std::set<std::pair<SourceLoc, SourceLoc>> sync_pairs;

    // (location, state) for blocking operations: BLOCKED if the op ever had
    // to wait there, BLOCKING if an op at that location released a waiter.
    std::set<std::pair<SourceLoc, std::string>> blocking_blocked;

    // Mutex contention: (waiter's lock location, holder's lock location).
    std::set<std::pair<SourceLoc, SourceLoc>> blocked_pairs;

    size_t total() const {
        return sync_pairs.size() + blocking_blocked.size() + blocked_pairs.size();
    }
    bool operator==(const CoverageSet&) const = default;
};

CoverageSet coverage_of(const TraceBundle& b);

// Union of both sets; throws std::invalid_argument when the programs differ.
CoverageSet merge(const CoverageSet& a, const CoverageSet& b);

// Cumulative coverage totals after each bundle, in order.
std::vector<size_t> growth_curve(const std::vector<CoverageSet>& runs);

}  // namespace ectsim
