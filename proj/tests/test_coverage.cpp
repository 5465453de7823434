#include <doctest.h>

#include "ectsim/coverage.hpp"
#include "helpers.hpp"

using namespace ectsim;
using namespace ectsim::testing;

namespace {

CoverageSet cov_of_corpus(const std::string& name, SchedPolicy policy, std::uint64_t seed,
                          std::optional<std::int64_t> arg0 = std::nullopt) {
    Program p = load_corpus(name);
    SchedulerConfig cfg;
    cfg.policy = policy;
    cfg.seed = seed;
    RunResult r = run(p, cfg, arg0);
    return coverage_of(bundle_of(r, name));
}

}  // namespace

TEST_CASE("a single rendezvous yields exactly one sync pair") {
    RunResult r = run_text(
        "func child(c: chan) {\n  send c 1\n}\n"
        "func main() {\n  c = make(chan)\n  go child(c)\n  OUT = recv c\n}\n");
    CoverageSet cov = coverage_of(bundle_of(r));
    CHECK(cov.sync_pairs.size() == 1);
    auto pair = *cov.sync_pairs.begin();
    CHECK(pair.first.line == 2);   // send c 1
    CHECK(pair.second.line == 7);  // OUT = recv c
}

TEST_CASE("blocked send records both sides of the blocking relation") {
    RunResult r = run_text(
        "func child(c: chan) {\n  send c 1\n}\n"
        "func main() {\n  c = make(chan)\n  go child(c)\n  yield\n  OUT = recv c\n}\n");
    CoverageSet cov = coverage_of(bundle_of(r));
    // child blocks at its send (line 2); main's recv (line 8) releases it
    CHECK(cov.blocking_blocked.count({{"test.csp", 2, 1}, "BLOCKED"}) == 1);
    CHECK(cov.blocking_blocked.count({{"test.csp", 8, 1}, "BLOCKING"}) == 1);
}

TEST_CASE("mutex contention produces a blocked pair of lock sites") {
    RunResult r = run_text(
        "func child(m: mutex, c: chan) {\n"
        "  lock m\n"
        "  unlock m\n"
        "  send c 1\n"
        "}\n"
        "func main() {\n"
        "  m = mutex()\n"
        "  c = make(chan)\n"
        "  lock m\n"
        "  go child(m, c)\n"
        "  yield\n"
        "  unlock m\n"
        "  OUT = recv c\n"
        "}\n");
    REQUIRE(r.outcome.status == RunStatus::Completed);
    CoverageSet cov = coverage_of(bundle_of(r));
    // child waits at line 2 while main holds the lock taken at line 9
    CHECK(cov.blocked_pairs.count({{"test.csp", 2, 1}, {"test.csp", 9, 1}}) == 1);
}

TEST_CASE("goroutine creation contributes no sync pair") {
    RunResult r = run_text(
        "func child() {\n  x = 1\n}\n"
        "func main() {\n  go child()\n  yield\n}\n");
    CoverageSet cov = coverage_of(bundle_of(r));
    CHECK(cov.sync_pairs.empty());
}

TEST_CASE("merge refuses mismatched programs") {
    CoverageSet a, b;
    a.program = "one.csp";
    b.program = "two.csp";
    CHECK_THROWS_AS(merge(a, b), std::invalid_argument);
}

TEST_CASE("merge is idempotent and commutative on corpus coverage") {
    CoverageSet a = cov_of_corpus("moby28462.csp", SchedPolicy::Fifo, 0);
    CoverageSet b = cov_of_corpus("moby28462.csp", SchedPolicy::Random, 9);
    CHECK(merge(a, a) == a);
    CHECK(merge(a, b) == merge(b, a));
    CHECK(merge(merge(a, b), b) == merge(a, b));
}

TEST_CASE("growth curves never decrease") {
    std::vector<CoverageSet> runs;
    for (std::uint64_t seed = 0; seed < 8; seed++)
        runs.push_back(cov_of_corpus("primesieve.csp", SchedPolicy::Random, seed, 4));
    auto curve = growth_curve(runs);
    REQUIRE(curve.size() == runs.size());
    for (size_t i = 1; i < curve.size(); i++) CHECK(curve[i] >= curve[i - 1]);
    CHECK(curve.front() >= runs.front().total());
}

TEST_CASE("coverage accumulates across policies") {
    CoverageSet fifo = cov_of_corpus("moby28462.csp", SchedPolicy::Fifo, 0);
    CoverageSet merged = fifo;
    for (std::uint64_t seed = 0; seed < 6; seed++)
        merged = merge(merged, cov_of_corpus("moby28462.csp", SchedPolicy::Random, seed));
    CHECK(merged.total() >= fifo.total());
    CHECK(merged.sync_pairs.size() >= fifo.sync_pairs.size());
}
