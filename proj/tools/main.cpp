#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ectsim/analyzers.hpp"
#include "ectsim/coverage.hpp"
#include "ectsim/fuzzer.hpp"
#include "ectsim/parser.hpp"
#include "ectsim/runtime.hpp"
#include "ectsim/trace_store.hpp"

namespace fs = std::filesystem;
using namespace ectsim;

#ifndef ECTSIM_CORPUS_DIR
#define ECTSIM_CORPUS_DIR "corpus"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBug = 2;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Program load_program(const fs::path& path) {
    ParseResult res = parse_and_validate(read_file(path), path.filename().string());
    if (!res.ok()) {
        for (const Diagnostic& d : res.diagnostics) std::cerr << d.str() << "\n";
        throw CLI::ValidationError(path.string() + ": program is not valid");
    }
    return std::move(res.program);
}

struct RunOpts {
    std::string file;
    std::string policy = "fifo";
    std::uint64_t seed = 0;
    double p = 0.25;
    int d = 5;
    std::int64_t max_steps = 1'000'000;
    std::int64_t arg0 = 0;
    bool has_arg0 = false;
    std::string out_dir;
    std::string points_from;  // trace dir to harvest critical points from
    bool force = false;
};

SchedulerConfig to_config(const RunOpts& o) {
    SchedulerConfig cfg;
    cfg.policy = *sched_policy_from_name(o.policy);
    cfg.seed = o.seed;
    cfg.yield_probability = o.p;
    cfg.delay_bound = o.d;
    cfg.max_steps = o.max_steps;
    return cfg;
}

void print_leaks(const TraceBundle& b, const LeakReport& report) {
    for (const Leak& l : report.leaks) std::cout << "leak: " << describe(b, l) << "\n";
}

void print_cycles(const TraceBundle& b, const std::vector<std::vector<WfgNode>>& cycles) {
    for (const auto& cyc : cycles) {
        std::cout << "cycle: ";
        for (const WfgNode& n : cyc) std::cout << wfg_node_label(b, n) << " -> ";
        std::cout << wfg_node_label(b, cyc.front()) << "\n";
    }
}

int cmd_run(const RunOpts& o) {
    Program prog = load_program(o.file);
    SchedulerConfig cfg = to_config(o);
    if (!o.points_from.empty()) {
        TraceBundle base = load_bundle(o.points_from);
        for (const SourceLoc& loc : critical_points(base)) cfg.critical_points.insert(loc);
    }
    std::optional<std::int64_t> arg0;
    if (o.has_arg0) arg0 = o.arg0;
    RunResult result = run(prog, cfg, arg0);

    std::string run_id = fs::path(o.file).stem().string() + "-" + o.policy + "-" +
                         std::to_string(o.seed);
    TraceBundle b = make_bundle(result, run_id, prog.file, cfg);
    LeakReport leaks = detect_leaks(b);

    std::cout << "outcome: " << result.outcome.status_str() << "\n";
    std::cout << "steps: " << result.outcome.steps << "\n";
    std::cout << "events: " << result.events.size() << "\n";
    if (!result.outcome.outputs.empty()) {
        std::cout << "out:";
        for (auto v : result.outcome.outputs) std::cout << " " << v;
        std::cout << "\n";
    }
    print_leaks(b, leaks);
    if (!o.out_dir.empty()) {
        save_bundle(b, o.out_dir, o.force);
        std::cout << "trace: " << o.out_dir << "\n";
    }
    bool clean = result.outcome.status == RunStatus::Completed && leaks.clean();
    return clean ? kExitOk : kExitBug;
}

int cmd_analyze(const std::string& dir, bool shiviz, bool dot, bool lanes, bool lint,
                bool points) {
    TraceBundle b = load_bundle(dir);
    if (shiviz) {
        std::cout << export_shiviz(b);
        return kExitOk;
    }
    if (dot) {
        std::cout << export_dot(b, build_waitfor(b));
        return kExitOk;
    }
    if (lanes) {
        std::cout << lane_view(b);
        return kExitOk;
    }
    if (points) {
        for (const SourceLoc& loc : critical_points(b))
            std::cout << loc.file << ":" << loc.line << "\n";
        return kExitOk;
    }
    if (lint) {
        auto bad = lint_trace(b);
        for (const auto& v : bad) std::cout << "lint: " << v << "\n";
        std::cout << (bad.empty() ? "lint: clean" : "lint: violations found") << "\n";
        return bad.empty() ? kExitOk : kExitBug;
    }
    std::cout << "run: " << b.meta.run_id << " (" << b.meta.program << ", " << b.meta.policy
              << ", seed " << b.meta.seed << ")\n";
    std::cout << "outcome: " << b.meta.outcome << "\n";
    LeakReport leaks = detect_leaks(b);
    print_leaks(b, leaks);
    auto cycles = find_cycles(build_waitfor(b));
    print_cycles(b, cycles);
    if (leaks.clean() && cycles.empty()) std::cout << "no leaks, no cycles\n";
    return leaks.clean() && cycles.empty() ? kExitOk : kExitBug;
}

int cmd_coverage(const std::vector<std::string>& dirs, bool curve) {
    std::vector<CoverageSet> sets;
    for (const auto& d : dirs) sets.push_back(coverage_of(load_bundle(d)));
    CoverageSet acc = sets.front();
    for (size_t i = 1; i < sets.size(); i++) acc = merge(acc, sets[i]);
    std::cout << "program: " << acc.program << "\n";
    std::cout << "sync_pairs: " << acc.sync_pairs.size() << "\n";
    std::cout << "blocking_blocked: " << acc.blocking_blocked.size() << "\n";
    std::cout << "blocked_pairs: " << acc.blocked_pairs.size() << "\n";
    std::cout << "total: " << acc.total() << "\n";
    if (curve) {
        auto c = growth_curve(sets);
        std::cout << "curve:";
        for (size_t v : c) std::cout << " " << v;
        std::cout << "\n";
    }
    return kExitOk;
}

int cmd_fuzz(const RunOpts& o, int iterations, bool keep_going) {
    Program prog = load_program(o.file);
    FuzzConfig cfg;
    cfg.iterations = iterations;
    cfg.base_seed = o.seed;
    cfg.yield_probability = o.p;
    cfg.delay_bound = o.d;
    cfg.max_steps = o.max_steps;
    cfg.stop_on_first_bug = !keep_going;
    if (o.has_arg0) cfg.arg0 = o.arg0;
    FuzzReport report = fuzz(prog, cfg);
    std::cout << "iterations: " << report.iterations.size() << "\n";
    std::cout << "critical_points: "
              << (report.iterations.empty() ? 0 : report.iterations.back().critical_points)
              << "\n";
    if (report.found_bug()) {
        std::cout << "bug: " << fuzz_outcome_name(report.first_bug) << " at iteration "
                  << *report.first_bug_iteration << " (seed "
                  << report.iterations[static_cast<size_t>(*report.first_bug_iteration)].seed
                  << ")\n";
        if (report.bug_result) {
            TraceBundle b = make_bundle(*report.bug_result, "fuzz-bug", prog.file,
                                        SchedulerConfig{});
            print_leaks(b, detect_leaks(b));
            print_cycles(b, find_cycles(build_waitfor(b)));
        }
        return kExitBug;
    }
    std::cout << "bug: none\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench: run every corpus program against the expectations in its header.
// ---------------------------------------------------------------------------

struct Expectations {
    std::string fifo, fuzz;
    std::optional<std::int64_t> arg0;
    int fuzz_iters = 200;
    std::vector<std::int64_t> out;
};

Expectations parse_expectations(const fs::path& file) {
    Expectations e;
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("//", 0) != 0) break;
        std::istringstream is(line.substr(2));
        std::string tag;
        is >> tag;
        if (tag == "expect:") {
            std::string kv;
            while (is >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "fifo") e.fifo = val;
                if (key == "fuzz") e.fuzz = val;
            }
        } else if (tag == "arg0:") {
            std::int64_t v;
            if (is >> v) e.arg0 = v;
        } else if (tag == "fuzz-iters:") {
            is >> e.fuzz_iters;
        } else if (tag == "out:") {
            std::int64_t v;
            while (is >> v) e.out.push_back(v);
        }
    }
    return e;
}

int cmd_bench(const std::string& corpus) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(corpus))
        if (entry.path().extension() == ".csp") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no .csp programs in " << corpus << "\n";
        return kExitUsage;
    }
    int failures = 0;
    for (const fs::path& f : files) {
        Expectations e = parse_expectations(f);
        Program prog = load_program(f.string());
        std::vector<std::string> problems;

        SchedulerConfig cfg;
        cfg.policy = SchedPolicy::Fifo;
        RunResult base = run(prog, cfg, e.arg0);
        std::string fifo_out = fuzz_outcome_name(classify_outcome(base));
        if (!e.fifo.empty() && fifo_out != e.fifo)
            problems.push_back("fifo: expected " + e.fifo + ", got " + fifo_out);
        if (!e.out.empty() && base.outcome.outputs != e.out)
            problems.push_back("fifo: unexpected outputs");

        if (!e.fuzz.empty()) {
            FuzzConfig fc;
            fc.iterations = e.fuzz_iters;
            fc.arg0 = e.arg0;
            FuzzReport rep = fuzz(prog, fc);
            std::string fuzz_out =
                rep.found_bug() ? fuzz_outcome_name(rep.first_bug) : "CLEAN";
            if (fuzz_out != e.fuzz)
                problems.push_back("fuzz: expected " + e.fuzz + ", got " + fuzz_out);
        }

        if (problems.empty()) {
            std::cout << "PASS " << f.filename().string() << "\n";
        } else {
            failures++;
            std::cout << "FAIL " << f.filename().string() << "\n";
            for (const auto& p : problems) std::cout << "  " << p << "\n";
        }
    }
    return failures == 0 ? kExitOk : kExitBug;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic CSP-style concurrency simulator and trace analyzer"};
    app.require_subcommand(1);

    // check
    std::string check_file;
    bool check_print = false;
    auto* check = app.add_subcommand("check", "Parse and validate a program");
    check->add_option("file", check_file, "program file")->required();
    check->add_flag("--print", check_print, "pretty-print the parsed program");

    // run
    RunOpts ro;
    auto* runc = app.add_subcommand("run", "Run a program and optionally record its trace");
    runc->add_option("file", ro.file, "program file")->required();
    runc->add_option("--policy", ro.policy, "fifo|random|delay")
        ->check(CLI::IsMember({"fifo", "random", "delay"}));
    runc->add_option("--seed", ro.seed, "scheduler seed");
    runc->add_option("--prob", ro.p, "delay probability at critical points");
    runc->add_option("--delay", ro.d, "delay bound in scheduler decisions");
    runc->add_option("--max-steps", ro.max_steps, "watchdog bound");
    auto* arg0_opt = runc->add_option("--arg0", ro.arg0, "value for ARG0 in main");
    runc->add_option("--out", ro.out_dir, "directory to write the trace to");
    runc->add_option("--points-from", ro.points_from,
                     "trace directory to harvest critical points from");
    runc->add_flag("--force", ro.force, "overwrite an existing trace");

    // analyze
    std::string an_dir;
    bool an_shiviz = false, an_dot = false, an_lanes = false, an_lint = false,
         an_points = false;
    auto* an = app.add_subcommand("analyze", "Post-mortem analysis of a recorded trace");
    an->add_option("dir", an_dir, "trace directory")->required();
    an->add_flag("--shiviz", an_shiviz, "emit a ShiViz-compatible log");
    an->add_flag("--dot", an_dot, "emit the wait-for graph as DOT");
    an->add_flag("--lanes", an_lanes, "emit a per-goroutine lane view");
    an->add_flag("--lint", an_lint, "check trace structure (pre/post pairing)");
    an->add_flag("--points", an_points, "list critical points");

    // coverage
    std::vector<std::string> cov_dirs;
    bool cov_curve = false;
    auto* cov = app.add_subcommand("coverage", "Synchronization coverage of traces");
    cov->add_option("dirs", cov_dirs, "trace directories")->required();
    cov->add_flag("--curve", cov_curve, "print the cumulative growth curve");

    // fuzz
    RunOpts fo;
    int fuzz_iterations = 1000;
    bool fuzz_keep_going = false;
    auto* fz = app.add_subcommand("fuzz", "Schedule fuzzing around critical points");
    fz->add_option("file", fo.file, "program file")->required();
    fz->add_option("--iterations", fuzz_iterations, "delay-injection iterations");
    fz->add_option("--seed", fo.seed, "base seed");
    fz->add_option("--prob", fo.p, "delay probability at critical points");
    fz->add_option("--delay", fo.d, "delay bound in scheduler decisions");
    fz->add_option("--max-steps", fo.max_steps, "watchdog bound");
    auto* farg0_opt = fz->add_option("--arg0", fo.arg0, "value for ARG0 in main");
    fz->add_flag("--keep-going", fuzz_keep_going, "continue after the first bug");

    // bench
    std::string bench_corpus = ECTSIM_CORPUS_DIR;
    auto* bench = app.add_subcommand("bench", "Run the corpus against its expectations");
    bench->add_option("--corpus", bench_corpus, "corpus directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) {
            ParseResult res = parse_and_validate(read_file(check_file),
                                                 fs::path(check_file).filename().string());
            for (const Diagnostic& d : res.diagnostics) std::cout << d.str() << "\n";
            if (!res.ok()) return kExitUsage;
            if (check_print) std::cout << pretty_print(res.program);
            else std::cout << "ok\n";
            return kExitOk;
        }
        if (runc->parsed()) {
            ro.has_arg0 = arg0_opt->count() > 0;
            return cmd_run(ro);
        }
        if (an->parsed())
            return cmd_analyze(an_dir, an_shiviz, an_dot, an_lanes, an_lint, an_points);
        if (cov->parsed()) return cmd_coverage(cov_dirs, cov_curve);
        if (fz->parsed()) {
            fo.has_arg0 = farg0_opt->count() > 0;
            return cmd_fuzz(fo, fuzz_iterations, fuzz_keep_going);
        }
        if (bench->parsed()) return cmd_bench(bench_corpus);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
