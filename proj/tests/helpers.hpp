#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ectsim/parser.hpp"
#include "ectsim/runtime.hpp"
#include "ectsim/trace_store.hpp"

#ifndef ECTSIM_CORPUS_DIR
#define ECTSIM_CORPUS_DIR "corpus"
#endif

namespace ectsim::testing {

inline std::string corpus_path(const std::string& name) {
    return std::string(ECTSIM_CORPUS_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Program compile(const std::string& text, const std::string& name = "test.csp") {
    ParseResult res = parse_and_validate(text, name);
    if (!res.ok()) {
        std::string msg = "compile failed:";
        for (const auto& d : res.diagnostics) msg += " [" + d.str() + "]";
        throw std::runtime_error(msg);
    }
    return std::move(res.program);
}

inline Program load_corpus(const std::string& name) {
    return compile(slurp(corpus_path(name)), name);
}

inline RunResult run_text(const std::string& text, SchedulerConfig cfg = {},
                          std::optional<std::int64_t> arg0 = std::nullopt) {
    Program p = compile(text);
    return run(p, cfg, arg0);
}

inline TraceBundle bundle_of(const RunResult& r, const std::string& program = "test.csp") {
    return make_bundle(r, "test", program, SchedulerConfig{});
}

inline std::vector<EventKind> kinds(const RunResult& r) {
    std::vector<EventKind> out;
    for (const Event& e : r.events) out.push_back(e.kind);
    return out;
}

}  // namespace ectsim::testing
