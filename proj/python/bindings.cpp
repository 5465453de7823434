// Python bindings for the simulator core. The compiled module stays small:
// opaque Program / TraceBundle / CoverageSet handles plus free functions that
// return plain Python values (dicts, lists, strings).

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ectsim/analyzers.hpp"
#include "ectsim/coverage.hpp"
#include "ectsim/fuzzer.hpp"
#include "ectsim/parser.hpp"
#include "ectsim/runtime.hpp"
#include "ectsim/trace_store.hpp"

namespace py = pybind11;
using namespace ectsim;

namespace {

// Program owns unique_ptr AST nodes, so it crosses the boundary as a
// unique_ptr (pybind would otherwise try to instantiate a copy).
std::unique_ptr<Program> parse_or_throw(const std::string& text, const std::string& name) {
    ParseResult res = parse_and_validate(text, name);
    if (!res.ok()) {
        std::string msg;
        for (const Diagnostic& d : res.diagnostics) {
            if (!msg.empty()) msg += "\n";
            msg += d.str();
        }
        throw py::value_error(msg);
    }
    return std::make_unique<Program>(std::move(res.program));
}

SchedulerConfig make_config(const std::string& policy, std::uint64_t seed,
                            double yield_probability, int delay_bound,
                            std::int64_t max_steps) {
    SchedulerConfig cfg;
    auto pol = sched_policy_from_name(policy);
    if (!pol) throw py::value_error("unknown policy '" + policy + "'");
    cfg.policy = *pol;
    cfg.seed = seed;
    cfg.yield_probability = yield_probability;
    cfg.delay_bound = delay_bound;
    cfg.max_steps = max_steps;
    return cfg;
}

py::dict meta_dict(const RunMeta& m) {
    py::dict d;
    d["run_id"] = m.run_id;
    d["program"] = m.program;
    d["policy"] = m.policy;
    d["seed"] = m.seed;
    d["yield_probability"] = m.yield_probability;
    d["delay_bound"] = m.delay_bound;
    d["max_steps"] = m.max_steps;
    d["outcome"] = m.outcome;
    d["steps"] = m.steps;
    d["outputs"] = m.outputs;
    return d;
}

py::dict event_dict(const TraceBundle& b, const Event& e) {
    py::dict d;
    d["id"] = e.id;
    d["ts"] = e.ts;
    d["g"] = e.g;
    d["kind"] = std::string(event_kind_name(e.kind));
    if (e.resource) {
        d["res_kind"] = std::string(res_kind_name(e.resource->first));
        d["res_id"] = e.resource->second;
        d["res_label"] = resource_label(b, e.resource->first, e.resource->second);
    } else {
        d["res_kind"] = py::none();
        d["res_id"] = py::none();
        d["res_label"] = py::none();
    }
    d["value"] = e.value ? py::cast(*e.value) : py::none();
    d["aux"] = e.aux ? py::cast(*e.aux) : py::none();
    d["stack_id"] = e.stack_id;
    py::list args;
    for (const auto& [k, v] : e.args) args.append(py::make_tuple(k, v));
    d["args"] = args;
    return d;
}

py::dict leak_dict(const TraceBundle& b, const Leak& l) {
    py::dict d;
    d["g"] = l.g;
    d["function"] = l.function;
    d["kind"] = l.kind == LeakKind::Blocked ? "BLOCKED" : "KILLED";
    d["reason"] = l.reason.empty() ? py::object(py::none()) : py::cast(l.reason);
    d["resource"] = l.resource
                        ? py::object(py::cast(resource_label(b, l.resource->first,
                                                             l.resource->second)))
                        : py::none();
    d["holder"] = l.holder ? py::cast(*l.holder) : py::none();
    d["loc"] = l.loc.str();
    d["description"] = describe(b, l);
    return d;
}

}  // namespace

PYBIND11_MODULE(_ectsim, m) {
    m.doc() = "Deterministic message-passing concurrency simulator with trace analysis";

    py::class_<Program>(m, "Program")
        .def_property_readonly("file", [](const Program& p) { return p.file; })
        .def_property_readonly("functions",
                               [](const Program& p) {
                                   std::vector<std::string> names;
                                   for (const auto& f : p.functions) names.push_back(f.name);
                                   return names;
                               })
        .def("__repr__", [](const Program& p) {
            return "<Program '" + p.file + "' with " + std::to_string(p.functions.size()) +
                   " functions>";
        });

    py::class_<TraceBundle>(m, "TraceBundle")
        .def_property_readonly("meta", [](const TraceBundle& b) { return meta_dict(b.meta); })
        .def_property_readonly("events",
                               [](const TraceBundle& b) {
                                   py::list out;
                                   for (const Event& e : b.events) out.append(event_dict(b, e));
                                   return out;
                               })
        .def("__len__", [](const TraceBundle& b) { return b.events.size(); })
        .def("__repr__", [](const TraceBundle& b) {
            return "<TraceBundle '" + b.meta.run_id + "' " + std::to_string(b.events.size()) +
                   " events, outcome " + b.meta.outcome + ">";
        });

    py::class_<CoverageSet>(m, "CoverageSet")
        .def_property_readonly("program", [](const CoverageSet& c) { return c.program; })
        .def_property_readonly("sync_pairs", [](const CoverageSet& c) {
            return c.sync_pairs.size();
        })
        .def_property_readonly("blocking_blocked",
                               [](const CoverageSet& c) { return c.blocking_blocked.size(); })
        .def_property_readonly("blocked_pairs",
                               [](const CoverageSet& c) { return c.blocked_pairs.size(); })
        .def("total", &CoverageSet::total)
        .def(py::self == py::self)
        .def("__repr__", [](const CoverageSet& c) {
            return "<CoverageSet '" + c.program + "' total=" + std::to_string(c.total()) + ">";
        });

    m.def("parse", &parse_or_throw, py::arg("text"), py::arg("name") = "program.csp",
          "Parse and check a program; raises ValueError with diagnostics on failure.");
    m.def(
        "pretty_print", [](const Program& p) { return pretty_print(p); },
        "Render the parsed program back to canonical source.");

    m.def(
        "run",
        [](const Program& p, const std::string& policy, std::uint64_t seed,
           double yield_probability, int delay_bound, std::int64_t max_steps,
           std::optional<std::int64_t> arg0, const std::string& run_id) {
            SchedulerConfig cfg =
                make_config(policy, seed, yield_probability, delay_bound, max_steps);
            RunResult r = run(p, cfg, arg0);
            return make_bundle(r, run_id, p.file, cfg);
        },
        py::arg("program"), py::arg("policy") = "fifo", py::arg("seed") = 0,
        py::arg("yield_probability") = 0.25, py::arg("delay_bound") = 5,
        py::arg("max_steps") = 1'000'000, py::arg("arg0") = py::none(),
        py::arg("run_id") = "run",
        "Execute the program under the given scheduling policy; returns the trace.");

    m.def(
        "save_trace",
        [](const TraceBundle& b, const std::filesystem::path& dir, bool force) {
            save_bundle(b, dir, force);
        },
        py::arg("bundle"), py::arg("dir"), py::arg("force") = false);
    m.def(
        "load_trace", [](const std::filesystem::path& dir) { return load_bundle(dir); },
        py::arg("dir"));

    m.def(
        "detect_leaks",
        [](const TraceBundle& b) {
            py::list out;
            for (const Leak& l : detect_leaks(b).leaks) out.append(leak_dict(b, l));
            return out;
        },
        py::arg("bundle"), "Application goroutines that never reached GO_END.");

    m.def(
        "deadlock_cycles",
        [](const TraceBundle& b) {
            py::list out;
            for (const auto& cyc : find_cycles(build_waitfor(b))) {
                py::list labels;
                for (const WfgNode& n : cyc) labels.append(wfg_node_label(b, n));
                out.append(labels);
            }
            return out;
        },
        py::arg("bundle"), "Cycles in the end-of-trace wait-for graph, as label lists.");

    m.def(
        "happens_before",
        [](const TraceBundle& b, int a_id, int b_id) {
            auto clocks = vector_clocks(b);
            if (a_id < 0 || b_id < 0 || a_id >= static_cast<int>(clocks.size()) ||
                b_id >= static_cast<int>(clocks.size()))
                throw py::value_error("event id out of range");
            return hb_leq(clocks[static_cast<size_t>(a_id)], clocks[static_cast<size_t>(b_id)]);
        },
        py::arg("bundle"), py::arg("a"), py::arg("b"),
        "True when event a happens-before event b under vector clocks.");

    m.def(
        "lint", [](const TraceBundle& b) { return lint_trace(b); }, py::arg("bundle"),
        "Structural violations in the trace (empty list = clean).");
    m.def(
        "export_shiviz", [](const TraceBundle& b) { return export_shiviz(b); },
        py::arg("bundle"));
    m.def(
        "export_dot", [](const TraceBundle& b) { return export_dot(b, build_waitfor(b)); },
        py::arg("bundle"));
    m.def(
        "lane_view", [](const TraceBundle& b) { return lane_view(b); }, py::arg("bundle"));

    m.def(
        "coverage", [](const TraceBundle& b) { return coverage_of(b); }, py::arg("bundle"));
    m.def(
        "merge_coverage",
        [](const CoverageSet& a, const CoverageSet& b) {
            try {
                return merge(a, b);
            } catch (const std::invalid_argument& e) {
                throw py::value_error(e.what());
            }
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "growth_curve", [](const std::vector<CoverageSet>& runs) { return growth_curve(runs); },
        py::arg("runs"));

    m.def(
        "fuzz",
        [](const Program& p, int iterations, std::uint64_t base_seed, double yield_probability,
           int delay_bound, std::int64_t max_steps, bool stop_on_first_bug,
           std::optional<std::int64_t> arg0) {
            FuzzConfig cfg;
            cfg.iterations = iterations;
            cfg.base_seed = base_seed;
            cfg.yield_probability = yield_probability;
            cfg.delay_bound = delay_bound;
            cfg.max_steps = max_steps;
            cfg.stop_on_first_bug = stop_on_first_bug;
            cfg.arg0 = arg0;
            FuzzReport rep = fuzz(p, cfg);
            py::dict d;
            d["iterations_run"] = rep.iterations.size();
            d["first_bug_iteration"] =
                rep.first_bug_iteration ? py::cast(*rep.first_bug_iteration) : py::none();
            d["first_bug"] = std::string(fuzz_outcome_name(rep.first_bug));
            if (rep.bug_result) {
                SchedulerConfig bug_cfg;
                bug_cfg.policy = SchedPolicy::DelayInject;
                bug_cfg.seed = cfg.base_seed + static_cast<std::uint64_t>(*rep.first_bug_iteration);
                d["bug_trace"] = make_bundle(*rep.bug_result, "fuzz-bug", p.file, bug_cfg);
            } else {
                d["bug_trace"] = py::none();
            }
            py::list recs;
            for (const IterationRecord& r : rep.iterations) {
                py::dict rd;
                rd["iteration"] = r.iteration;
                rd["seed"] = r.seed;
                rd["outcome"] = std::string(fuzz_outcome_name(r.outcome));
                rd["steps"] = r.steps;
                rd["critical_points"] = r.critical_points;
                recs.append(rd);
            }
            d["records"] = recs;
            return d;
        },
        py::arg("program"), py::arg("iterations") = 1000, py::arg("base_seed") = 0,
        py::arg("yield_probability") = 0.25, py::arg("delay_bound") = 5,
        py::arg("max_steps") = 1'000'000, py::arg("stop_on_first_bug") = true,
        py::arg("arg0") = py::none(),
        "Schedule fuzzing: cooperative baseline, then delay injection around critical points.");
}
