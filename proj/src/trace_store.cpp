#include "ectsim/trace_store.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ectsim {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string opt_str(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

// Splits one CSV record. Handles quoted fields; no embedded newlines needed
// by our writers, so records are exactly one physical line.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); i++) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    i++;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

[[noreturn]] void row_error(const fs::path& file, size_t line_no, const std::string& what) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::int64_t to_i64(const fs::path& file, size_t line_no, const std::string& s) {
    try {
        size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        row_error(file, line_no, "expected integer, got '" + s + "'");
    }
}

std::optional<std::int64_t> to_opt_i64(const fs::path& file, size_t line_no,
                                       const std::string& s) {
    if (s.empty()) return std::nullopt;
    return to_i64(file, line_no, s);
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

constexpr const char* kEventsHeader = "id,ts,g,kind,res_kind,res_id,value,aux,stack_id";
constexpr const char* kStacksHeader = "stack_id,depth,func,file,line";
constexpr const char* kArgsHeader = "event_id,position,name,value";

}  // namespace

TraceBundle make_bundle(const RunResult& result, const std::string& run_id,
                        const std::string& program, const SchedulerConfig& config) {
    TraceBundle b;
    b.meta.run_id = run_id;
    b.meta.program = program;
    b.meta.policy = sched_policy_name(config.policy);
    b.meta.seed = config.seed;
    b.meta.yield_probability = config.yield_probability;
    b.meta.delay_bound = config.delay_bound;
    b.meta.max_steps = config.max_steps;
    b.meta.outcome = result.outcome.status_str();
    b.meta.steps = result.outcome.steps;
    b.meta.outputs = result.outcome.outputs;
    b.events = result.events;
    b.stacks = result.stacks;
    return b;
}

void save_bundle(const TraceBundle& bundle, const fs::path& dir, bool force) {
    fs::create_directories(dir);
    fs::path meta_path = dir / "meta.json";
    if (!force && fs::exists(meta_path))
        throw std::runtime_error(dir.string() + " already contains a trace (use force)");

    std::ostringstream ev;
    ev << kEventsHeader << "\n";
    std::ostringstream args;
    args << kArgsHeader << "\n";
    for (const Event& e : bundle.events) {
        ev << e.id << ',' << e.ts << ',' << e.g << ',' << event_kind_name(e.kind) << ','
           << (e.resource ? res_kind_name(e.resource->first) : "") << ','
           << (e.resource ? std::to_string(e.resource->second) : "") << ',' << opt_str(e.value)
           << ',' << opt_str(e.aux) << ',' << e.stack_id << "\n";
        for (size_t i = 0; i < e.args.size(); i++) {
            args << e.id << ',' << i << ',' << csv_field(e.args[i].first) << ','
                 << csv_field(e.args[i].second) << "\n";
        }
    }

    std::ostringstream st;
    st << kStacksHeader << "\n";
    for (size_t sid = 0; sid < bundle.stacks.size(); sid++) {
        const auto& frames = bundle.stacks.get(static_cast<int>(sid));
        for (size_t d = 0; d < frames.size(); d++) {
            st << sid << ',' << d << ',' << csv_field(frames[d].func) << ','
               << csv_field(frames[d].file) << ',' << frames[d].line << "\n";
        }
    }

    json meta;
    meta["run_id"] = bundle.meta.run_id;
    meta["program"] = bundle.meta.program;
    meta["policy"] = bundle.meta.policy;
    meta["seed"] = bundle.meta.seed;
    meta["yield_probability"] = bundle.meta.yield_probability;
    meta["delay_bound"] = bundle.meta.delay_bound;
    meta["max_steps"] = bundle.meta.max_steps;
    meta["outcome"] = bundle.meta.outcome;
    meta["steps"] = bundle.meta.steps;
    meta["outputs"] = bundle.meta.outputs;

    atomic_write(dir / "events.csv", ev.str());
    atomic_write(dir / "stack_frames.csv", st.str());
    atomic_write(dir / "arguments.csv", args.str());
    atomic_write(meta_path, meta.dump(2) + "\n");
}

TraceBundle load_bundle(const fs::path& dir) {
    TraceBundle b;

    fs::path meta_path = dir / "meta.json";
    {
        std::ifstream in(meta_path);
        if (!in) throw std::runtime_error("cannot open " + meta_path.string());
        json meta;
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw std::runtime_error(meta_path.string() + ": " + e.what());
        }
        try {
            b.meta.run_id = meta.at("run_id").get<std::string>();
            b.meta.program = meta.at("program").get<std::string>();
            b.meta.policy = meta.at("policy").get<std::string>();
            b.meta.seed = meta.at("seed").get<std::uint64_t>();
            b.meta.yield_probability = meta.at("yield_probability").get<double>();
            b.meta.delay_bound = meta.at("delay_bound").get<int>();
            b.meta.max_steps = meta.at("max_steps").get<std::int64_t>();
            b.meta.outcome = meta.at("outcome").get<std::string>();
            b.meta.steps = meta.at("steps").get<std::int64_t>();
            b.meta.outputs = meta.at("outputs").get<std::vector<std::int64_t>>();
        } catch (const json::exception& e) {
            throw std::runtime_error(meta_path.string() + ": " + e.what());
        }
    }

    fs::path stacks_path = dir / "stack_frames.csv";
    {
        auto lines = read_lines(stacks_path);
        if (lines.empty() || lines[0] != kStacksHeader)
            row_error(stacks_path, 1, "bad or missing header");
        std::vector<std::vector<StackFrame>> by_id;
        for (size_t i = 1; i < lines.size(); i++) {
            if (lines[i].empty()) continue;
            auto f = split_csv(lines[i]);
            if (f.size() != 5) row_error(stacks_path, i + 1, "expected 5 fields");
            auto sid = to_i64(stacks_path, i + 1, f[0]);
            auto depth = to_i64(stacks_path, i + 1, f[1]);
            if (sid < 0 || static_cast<size_t>(sid) > by_id.size())
                row_error(stacks_path, i + 1, "stack ids must be dense and ordered");
            if (static_cast<size_t>(sid) == by_id.size()) by_id.emplace_back();
            if (static_cast<size_t>(depth) != by_id[static_cast<size_t>(sid)].size())
                row_error(stacks_path, i + 1, "frame depths must be dense and ordered");
            by_id[static_cast<size_t>(sid)].push_back(
                {f[2], f[3], static_cast<int>(to_i64(stacks_path, i + 1, f[4]))});
        }
        for (auto& frames : by_id) b.stacks.push_raw(std::move(frames));
    }

    fs::path events_path = dir / "events.csv";
    {
        auto lines = read_lines(events_path);
        if (lines.empty() || lines[0] != kEventsHeader)
            row_error(events_path, 1, "bad or missing header");
        for (size_t i = 1; i < lines.size(); i++) {
            if (lines[i].empty()) continue;
            auto f = split_csv(lines[i]);
            if (f.size() != 9) row_error(events_path, i + 1, "expected 9 fields");
            Event e;
            e.id = static_cast<int>(to_i64(events_path, i + 1, f[0]));
            if (e.id != static_cast<int>(b.events.size()))
                row_error(events_path, i + 1, "event ids must be dense and ordered");
            e.ts = to_i64(events_path, i + 1, f[1]);
            e.g = static_cast<int>(to_i64(events_path, i + 1, f[2]));
            auto kind = event_kind_from_name(f[3]);
            if (!kind) row_error(events_path, i + 1, "unknown event kind '" + f[3] + "'");
            e.kind = *kind;
            if (f[4].empty() != f[5].empty())
                row_error(events_path, i + 1, "res_kind and res_id must be set together");
            if (!f[4].empty()) {
                auto rk = res_kind_from_name(f[4]);
                if (!rk) row_error(events_path, i + 1, "unknown resource kind '" + f[4] + "'");
                e.resource = {{*rk, static_cast<int>(to_i64(events_path, i + 1, f[5]))}};
            }
            e.value = to_opt_i64(events_path, i + 1, f[6]);
            e.aux = to_opt_i64(events_path, i + 1, f[7]);
            e.stack_id = static_cast<int>(to_i64(events_path, i + 1, f[8]));
            if (e.stack_id < 0 || static_cast<size_t>(e.stack_id) >= b.stacks.size())
                row_error(events_path, i + 1,
                          "stack_id " + f[8] + " not present in stack_frames.csv");
            b.events.push_back(std::move(e));
        }
    }

    fs::path args_path = dir / "arguments.csv";
    {
        auto lines = read_lines(args_path);
        if (lines.empty() || lines[0] != kArgsHeader)
            row_error(args_path, 1, "bad or missing header");
        for (size_t i = 1; i < lines.size(); i++) {
            if (lines[i].empty()) continue;
            auto f = split_csv(lines[i]);
            if (f.size() != 4) row_error(args_path, i + 1, "expected 4 fields");
            auto eid = to_i64(args_path, i + 1, f[0]);
            if (eid < 0 || static_cast<size_t>(eid) >= b.events.size())
                row_error(args_path, i + 1, "event_id " + f[0] + " not present in events.csv");
            auto pos = to_i64(args_path, i + 1, f[1]);
            auto& args = b.events[static_cast<size_t>(eid)].args;
            if (static_cast<size_t>(pos) != args.size())
                row_error(args_path, i + 1, "argument positions must be dense and ordered");
            args.emplace_back(f[2], f[3]);
        }
    }

    return b;
}

std::vector<const Event*> events_by_goroutine(const TraceBundle& b, int g) {
    std::vector<const Event*> out;
    for (const Event& e : b.events)
        if (e.g == g) out.push_back(&e);
    return out;
}

const Event* final_event(const TraceBundle& b, int g) {
    const Event* last = nullptr;
    for (const Event& e : b.events)
        if (e.g == g) last = &e;
    return last;
}

std::vector<const Event*> events_of_kind(const TraceBundle& b, EventKind k) {
    std::vector<const Event*> out;
    for (const Event& e : b.events)
        if (e.kind == k) out.push_back(&e);
    return out;
}

std::vector<const Event*> events_on_resource(const TraceBundle& b, ResKind rk, int res_id) {
    std::vector<const Event*> out;
    for (const Event& e : b.events)
        if (e.resource && e.resource->first == rk && e.resource->second == res_id)
            out.push_back(&e);
    return out;
}

}  // namespace ectsim
