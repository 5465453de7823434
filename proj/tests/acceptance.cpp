// Acceptance gate: one check per numbered criterion, one PASS/FAIL line each.
// Exits non-zero if any criterion fails.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "ectsim/analyzers.hpp"
#include "ectsim/coverage.hpp"
#include "ectsim/fuzzer.hpp"
#include "ectsim/parser.hpp"
#include "ectsim/runtime.hpp"
#include "ectsim/trace_store.hpp"
#include "helpers.hpp"

using namespace ectsim;
using namespace ectsim::testing;
namespace fs = std::filesystem;

namespace {

std::ostringstream detail;

const char* kCorpus[] = {"moby28462.csp",        "primesieve.csp",     "double_lock.csp",
                         "send_no_receiver.csp", "wg_missing_done.csp", "select_race.csp"};

std::optional<std::int64_t> arg0_for(const std::string& name) {
    if (name == "primesieve.csp") return 4;
    return std::nullopt;
}

// --------------------------------------------------------------------------
// 1. moby28462 leak reproduction
// --------------------------------------------------------------------------
bool criterion1() {
    Program p = load_corpus("moby28462.csp");
    RunResult base = run(p, SchedulerConfig{});
    if (classify_outcome(base) != FuzzOutcome::Clean) {
        detail << "baseline not clean";
        return false;
    }
    FuzzConfig cfg;  // 1000 iterations, p = 0.25, d = 5, base seed 0
    FuzzReport rep = fuzz(p, cfg);
    if (!rep.found_bug() || rep.first_bug != FuzzOutcome::Leak) {
        detail << "campaign found no leak";
        return false;
    }
    TraceBundle b = make_bundle(*rep.bug_result, "bug", "moby28462.csp", SchedulerConfig{});
    LeakReport leaks = detect_leaks(b);
    if (leaks.leaks.size() != 2) {
        detail << "expected 2 leaks, got " << leaks.leaks.size();
        return false;
    }
    const Leak *monitor = nullptr, *status = nullptr;
    for (const Leak& l : leaks.leaks) {
        if (l.function == "Monitor") monitor = &l;
        if (l.function == "StatusChange") status = &l;
    }
    if (!monitor || !status) {
        detail << "leaked goroutines are not Monitor and StatusChange";
        return false;
    }
    bool report_ok =
        monitor->kind == LeakKind::Blocked && monitor->reason == "LOCK" && monitor->resource &&
        resource_label(b, monitor->resource->first, monitor->resource->second) == "M1" &&
        monitor->holder && *monitor->holder == status->g && status->kind == LeakKind::Blocked &&
        status->reason == "SEND" && status->resource &&
        resource_label(b, status->resource->first, status->resource->second) == "C1";
    if (!report_ok) {
        detail << "leak report fields differ from the documented report";
        return false;
    }
    auto cycles = find_cycles(build_waitfor(b));
    if (cycles.size() != 1 || cycles[0].size() != 4) {
        detail << "expected one 4-node cycle, got " << cycles.size();
        return false;
    }
    std::set<std::string> labels;
    for (const WfgNode& n : cycles[0]) labels.insert(wfg_node_label(b, n));
    bool cycle_ok = labels.count("M1") && labels.count("C1") &&
                    labels.count("Monitor(g" + std::to_string(monitor->g) + ")") &&
                    labels.count("StatusChange(g" + std::to_string(status->g) + ")");
    if (!cycle_ok) {
        detail << "cycle nodes differ from Monitor-M1-StatusChange-C1";
        return false;
    }
    detail << "leak found at iteration " << *rep.first_bug_iteration;
    return true;
}

// --------------------------------------------------------------------------
// 2. Prime-sieve structural counts
// --------------------------------------------------------------------------
std::vector<std::int64_t> first_primes(int n) {
    std::vector<std::int64_t> out;
    for (std::int64_t c = 2; static_cast<int>(out.size()) < n; c++) {
        bool prime = true;
        for (std::int64_t d = 2; d * d <= c; d++)
            if (c % d == 0) prime = false;
        if (prime) out.push_back(c);
    }
    return out;
}

bool criterion2() {
    Program p = load_corpus("primesieve.csp");
    size_t prev_events = 0;
    for (int n : {1, 2, 4, 16, 64}) {
        RunResult r = run(p, SchedulerConfig{}, n);
        if (r.outcome.status != RunStatus::Completed) {
            detail << "N=" << n << " did not complete";
            return false;
        }
        TraceBundle b = make_bundle(r, "sieve", "primesieve.csp", SchedulerConfig{});
        Classification c = classify(b);
        int app = 0;
        for (const auto& [g, cls] : c.classes)
            if (cls == GoClass::Application) app++;
        size_t chans = events_of_kind(b, EventKind::ChMake).size();
        if (app != n + 2) {
            detail << "N=" << n << ": goroutines " << app << " != " << n + 2;
            return false;
        }
        if (chans != static_cast<size_t>(n) + 1) {
            detail << "N=" << n << ": channels " << chans << " != " << n + 1;
            return false;
        }
        if (r.outcome.outputs != first_primes(n)) {
            detail << "N=" << n << ": outputs are not the first " << n << " primes";
            return false;
        }
        if (r.events.size() <= prev_events) {
            detail << "N=" << n << ": event count did not increase";
            return false;
        }
        prev_events = r.events.size();
    }
    return true;
}

// --------------------------------------------------------------------------
// 3. Determinism: byte-identical CSV tables
// --------------------------------------------------------------------------
bool criterion3() {
    fs::path root = fs::temp_directory_path() / "ectsim_acceptance_det";
    fs::remove_all(root);
    for (const char* name : kCorpus) {
        Program p = load_corpus(name);
        SchedulerConfig cfgs[3];
        cfgs[0].policy = SchedPolicy::Fifo;
        cfgs[1].policy = SchedPolicy::Random;
        cfgs[1].seed = 7;
        cfgs[2].policy = SchedPolicy::DelayInject;
        cfgs[2].seed = 7;
        for (const SchedulerConfig& cfg : cfgs) {
            fs::path a = root / "a", bdir = root / "b";
            for (const fs::path& dir : {a, bdir}) {
                RunResult r = run(p, cfg, arg0_for(name));
                save_bundle(make_bundle(r, "det", name, cfg), dir, /*force=*/true);
            }
            for (const char* f : {"events.csv", "stack_frames.csv", "arguments.csv"}) {
                if (slurp((a / f).string()) != slurp((bdir / f).string())) {
                    detail << name << " " << sched_policy_name(cfg.policy) << ": " << f
                           << " differs between runs";
                    return false;
                }
            }
        }
    }
    fs::remove_all(root);
    return true;
}

// --------------------------------------------------------------------------
// 4. Happens-before oracle equivalence (>= 20 traces, <= 300 events)
// --------------------------------------------------------------------------
std::vector<std::vector<bool>> oracle_reachability(const TraceBundle& b) {
    size_t n = b.events.size();
    std::vector<std::vector<int>> succ(n);
    std::map<int, int> last_of_g;
    for (const Event& e : b.events) {
        auto it = last_of_g.find(e.g);
        if (it != last_of_g.end()) succ[static_cast<size_t>(it->second)].push_back(e.id);
        last_of_g[e.g] = e.id;
    }
    for (const SyncEdge& se : sync_edges(b)) succ[static_cast<size_t>(se.from)].push_back(se.to);
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (size_t s = 0; s < n; s++) {
        std::vector<int> stack = {static_cast<int>(s)};
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            for (int nx : succ[static_cast<size_t>(cur)])
                if (!reach[s][static_cast<size_t>(nx)]) {
                    reach[s][static_cast<size_t>(nx)] = true;
                    stack.push_back(nx);
                }
        }
    }
    return reach;
}

// A small randomized program: workers exchange values over shared channels
// and touch a mutex; structure is drawn from the seeded generator.
std::string random_program(std::mt19937_64& rng) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    int workers = 1 + pick(3);
    std::ostringstream os;
    os << "func worker(c: chan, d: chan, m: mutex) {\n";
    int ops = 1 + pick(3);
    for (int i = 0; i < ops; i++) {
        switch (pick(4)) {
            case 0: os << "  send c " << pick(10) << "\n"; break;
            case 1:
                os << "  lock m\n"
                   << "  unlock m\n";
                break;
            case 2: os << "  send d " << pick(10) << "\n"; break;
            case 3: os << "  yield\n"; break;
        }
    }
    os << "}\n";
    os << "func main() {\n"
       << "  c = make(chan, " << pick(3) << ")\n"
       << "  d = make(chan, " << pick(3) << ")\n"
       << "  m = mutex()\n";
    for (int w = 0; w < workers; w++) os << "  go worker(c, d, m)\n";
    // drain everything the workers may send so nothing blocks forever
    os << "  t = 0\n"
       << "  for i in 0 .. " << workers * 3 << " {\n"
       << "    select {\n"
       << "      case x = recv c { t = t + x }\n"
       << "      case y = recv d { t = t + y }\n"
       << "      default { yield }\n"
       << "    }\n"
       << "  }\n"
       << "}\n";
    return os.str();
}

bool criterion4() {
    std::vector<TraceBundle> traces;
    for (const char* name : kCorpus) {
        Program p = load_corpus(name);
        SchedulerConfig fifo;
        SchedulerConfig rnd;
        rnd.policy = SchedPolicy::Random;
        rnd.seed = 13;
        std::optional<std::int64_t> arg0 = name == std::string("primesieve.csp")
                                               ? std::optional<std::int64_t>(1)
                                               : std::nullopt;
        traces.push_back(bundle_of(run(p, fifo, arg0), name));
        traces.push_back(bundle_of(run(p, rnd, arg0), name));
    }
    std::mt19937_64 rng(20260823);
    while (traces.size() < 24) {
        std::string text = random_program(rng);
        Program p = compile(text, "random.csp");
        SchedulerConfig cfg;
        cfg.policy = SchedPolicy::Random;
        cfg.seed = rng();
        cfg.max_steps = 5000;
        traces.push_back(bundle_of(run(p, cfg), "random.csp"));
    }
    size_t used = 0;
    for (const TraceBundle& b : traces) {
        if (b.events.size() > 300) continue;  // criterion caps trace size at 300 events
        used++;
        auto clocks = vector_clocks(b);
        auto reach = oracle_reachability(b);
        for (size_t i = 0; i < b.events.size(); i++)
            for (size_t j = 0; j < b.events.size(); j++) {
                if (i == j) continue;
                if (hb_leq(clocks[i], clocks[j]) != reach[i][j]) {
                    detail << "vector clocks disagree with the closure oracle at events " << i
                           << "," << j;
                    return false;
                }
            }
    }
    detail << used << " traces checked";
    return used >= 20;
}

// --------------------------------------------------------------------------
// 5. Pre/post protocol invariants
// --------------------------------------------------------------------------
bool criterion5() {
    size_t runs = 0;
    for (const char* name : kCorpus) {
        Program p = load_corpus(name);
        for (int pol = 0; pol < 3; pol++) {
            SchedulerConfig cfg;
            cfg.policy = static_cast<SchedPolicy>(pol);
            cfg.seed = 7;
            TraceBundle b = bundle_of(run(p, cfg, arg0_for(name)), name);
            auto bad = lint_trace(b);
            if (!bad.empty()) {
                detail << name << "/" << sched_policy_name(cfg.policy) << ": " << bad.front();
                return false;
            }
            runs++;
        }
    }
    detail << runs << " runs linted, zero violations";
    return true;
}

// --------------------------------------------------------------------------
// 6. Global deadlock rule
// --------------------------------------------------------------------------
bool criterion6() {
    // main-blocked variants must deadlock under every policy
    const char* main_blocked[] = {
        "func main() {\n  c = make(chan)\n  send c 1\n}\n",
        "func main() {\n  c = make(chan)\n  recv c\n}\n",
        "func main() {\n  w = wg()\n  add w 1\n  wait w\n}\n",
    };
    for (const char* text : main_blocked) {
        for (int pol = 0; pol < 3; pol++) {
            SchedulerConfig cfg;
            cfg.policy = static_cast<SchedPolicy>(pol);
            cfg.seed = 5;
            RunResult r = run_text(text, cfg);
            if (r.outcome.status != RunStatus::GlobalDeadlock) {
                detail << "main-blocked variant did not deadlock under "
                       << sched_policy_name(cfg.policy);
                return false;
            }
        }
    }
    // non-main-blocked variants: main exits; outcome is CLEAN or LEAK
    const char* child_blocked[] = {
        "func stuck(c: chan) {\n  recv c\n}\n"
        "func main() {\n  c = make(chan)\n  go stuck(c)\n  yield\n}\n",
        "func stuck(c: chan) {\n  send c 1\n}\n"
        "func main() {\n  c = make(chan)\n  go stuck(c)\n  yield\n}\n",
    };
    for (const char* text : child_blocked) {
        for (int pol = 0; pol < 3; pol++) {
            SchedulerConfig cfg;
            cfg.policy = static_cast<SchedPolicy>(pol);
            cfg.seed = 5;
            RunResult r = run_text(text, cfg);
            if (r.outcome.status == RunStatus::GlobalDeadlock) {
                detail << "child-blocked variant deadlocked under "
                       << sched_policy_name(cfg.policy);
                return false;
            }
            FuzzOutcome out = classify_outcome(r);
            if (out != FuzzOutcome::Clean && out != FuzzOutcome::Leak) {
                detail << "child-blocked variant was " << fuzz_outcome_name(out);
                return false;
            }
        }
    }
    return true;
}

// --------------------------------------------------------------------------
// 7. Storage round-trip
// --------------------------------------------------------------------------
bool criterion7() {
    fs::path root = fs::temp_directory_path() / "ectsim_acceptance_store";
    fs::remove_all(root);
    size_t bundles = 0;
    for (const char* name : kCorpus) {
        Program p = load_corpus(name);
        for (int pol = 0; pol < 3; pol++) {
            SchedulerConfig cfg;
            cfg.policy = static_cast<SchedPolicy>(pol);
            cfg.seed = 21;
            TraceBundle b =
                make_bundle(run(p, cfg, arg0_for(name)), std::string(name) + "-rt", name, cfg);
            save_bundle(b, root, /*force=*/true);
            TraceBundle loaded = load_bundle(root);
            if (!(loaded.meta == b.meta) || loaded.events != b.events ||
                !(loaded.stacks == b.stacks)) {
                detail << name << ": load(save(x)) != x";
                return false;
            }
            bundles++;
        }
    }
    // dangling foreign key must be rejected with a row-level error
    {
        std::ofstream out(root / "arguments.csv", std::ios::app);
        out << "424242,0,bad,ref\n";
    }
    try {
        load_bundle(root);
        detail << "dangling event_id was accepted";
        return false;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        if (msg.find("arguments.csv") == std::string::npos) {
            detail << "error lacks row context: " << msg;
            return false;
        }
    }
    fs::remove_all(root);
    detail << bundles << " bundles round-tripped";
    return true;
}

// --------------------------------------------------------------------------
// 8. Coverage properties
// --------------------------------------------------------------------------
bool criterion8() {
    // single rendezvous -> exactly one sync pair
    RunResult rv = run_text(
        "func child(c: chan) {\n  send c 1\n}\n"
        "func main() {\n  c = make(chan)\n  go child(c)\n  OUT = recv c\n}\n");
    CoverageSet single = coverage_of(bundle_of(rv));
    if (single.sync_pairs.size() != 1) {
        detail << "single rendezvous produced " << single.sync_pairs.size() << " sync pairs";
        return false;
    }
    // growth curves are non-decreasing
    Program p = load_corpus("moby28462.csp");
    std::vector<CoverageSet> sets;
    for (std::uint64_t seed = 0; seed < 10; seed++) {
        SchedulerConfig cfg;
        cfg.policy = SchedPolicy::Random;
        cfg.seed = seed;
        sets.push_back(coverage_of(bundle_of(run(p, cfg), "moby28462.csp")));
    }
    auto curve = growth_curve(sets);
    for (size_t i = 1; i < curve.size(); i++)
        if (curve[i] < curve[i - 1]) {
            detail << "growth curve decreased at step " << i;
            return false;
        }
    // merge is idempotent and commutative on corpus coverage sets
    for (const char* name : kCorpus) {
        Program q = load_corpus(name);
        SchedulerConfig f;
        SchedulerConfig r;
        r.policy = SchedPolicy::Random;
        r.seed = 3;
        CoverageSet a = coverage_of(bundle_of(run(q, f, arg0_for(name)), name));
        CoverageSet b = coverage_of(bundle_of(run(q, r, arg0_for(name)), name));
        if (!(merge(a, a) == a) || !(merge(a, b) == merge(b, a))) {
            detail << name << ": merge algebra violated";
            return false;
        }
    }
    return true;
}

// --------------------------------------------------------------------------
// 9. Fuzz acceleration
// --------------------------------------------------------------------------
bool criterion9() {
    struct Case {
        const char* file;
        FuzzOutcome expected;
        bool schedule_dependent;  // FIFO baseline must NOT find it
    };
    Case cases[] = {
        {"moby28462.csp", FuzzOutcome::Leak, true},
        {"double_lock.csp", FuzzOutcome::GlobalDeadlock, true},
        {"select_race.csp", FuzzOutcome::Leak, true},
        {"wg_missing_done.csp", FuzzOutcome::Leak, false},
        {"send_no_receiver.csp", FuzzOutcome::GlobalDeadlock, false},
    };
    for (const Case& c : cases) {
        Program p = load_corpus(c.file);
        if (c.schedule_dependent &&
            classify_outcome(run(p, SchedulerConfig{})) != FuzzOutcome::Clean) {
            detail << c.file << ": FIFO baseline already finds the bug";
            return false;
        }
        int hits = 0;
        std::vector<std::string> firsts;
        for (std::uint64_t base : {101u, 202u, 303u}) {
            FuzzConfig cfg;  // defaults: 1000 iterations, p=0.25, d=5
            cfg.base_seed = base;
            FuzzReport rep = fuzz(p, cfg);
            if (rep.found_bug() && rep.first_bug == c.expected) {
                hits++;
                firsts.push_back(std::to_string(*rep.first_bug_iteration));
            } else {
                firsts.push_back("-");
            }
        }
        detail << c.file << " first_bug_iteration=[" << firsts[0] << "," << firsts[1] << ","
               << firsts[2] << "] ";
        if (hits < 1) {
            detail << c.file << ": bug not found under any of 3 base seeds";
            return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* title;
        std::function<bool()> check;
    };
    Criterion criteria[] = {
        {1, "moby28462 reproduction (baseline clean; campaign finds the known leak and cycle)",
         criterion1},
        {2, "prime-sieve structural counts and outputs for N in {1,2,4,16,64}", criterion2},
        {3, "byte-identical determinism across repeated runs", criterion3},
        {4, "vector-clock order equals brute-force closure on >= 20 traces", criterion4},
        {5, "pre/post protocol lint over all corpus runs", criterion5},
        {6, "global deadlock iff main is blocked with nothing runnable", criterion6},
        {7, "storage round-trip and foreign-key rejection", criterion7},
        {8, "coverage growth, single-rendezvous pair, merge algebra", criterion8},
        {9, "delay injection finds corpus bugs the baseline misses", criterion9},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        detail.str("");
        bool ok = false;
        std::string error;
        try {
            ok = c.check();
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (!ok) failures++;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.title;
        std::string extra = detail.str();
        if (!error.empty()) std::cout << " [exception: " << error << "]";
        else if (!extra.empty()) std::cout << " [" << extra << "]";
        std::cout << "\n";
    }
    if (failures == 0) std::cout << "all 9 criteria passed\n";
    else std::cout << failures << " criteria failed\n";
    return failures == 0 ? 0 : 1;
}
