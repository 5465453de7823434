#include "ectsim/analyzers.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace ectsim {

namespace {

const StackFrame& top_frame(const TraceBundle& b, const Event& e) {
    return b.stacks.get(e.stack_id).front();
}

SourceLoc event_loc(const TraceBundle& b, const Event& e) {
    const StackFrame& f = top_frame(b, e);
    return {f.file, f.line, 1};
}

std::string reason_from_aux(const Event& block_ev) {
    int code = static_cast<int>(block_ev.aux.value_or(0));
    if (code < 0 || code > 5) return "?";
    return block_reason_name(static_cast<BlockReason>(code));
}

// Mutex owner at end of trace, or 0.
int final_owner(const TraceBundle& b, int mutex_id) {
    int owner = 0;
    for (const Event& e : b.events) {
        if (!e.resource || e.resource->first != ResKind::Mutex ||
            e.resource->second != mutex_id)
            continue;
        if (e.kind == EventKind::MuLockPost) owner = e.g;
        else if (e.kind == EventKind::MuUnlock) owner = 0;
    }
    return owner;
}

// The select-case channel list recorded in a SELECT_PRE's argument rows.
struct SelCase {
    bool is_send = false;
    int chan = 0;
};

std::vector<SelCase> select_cases(const Event& pre) {
    std::vector<SelCase> out;
    for (size_t i = 0; i + 1 < pre.args.size(); i += 2) {
        const auto& [dk, dv] = pre.args[i];
        const auto& [rk, rv] = pre.args[i + 1];
        if (dk.size() < 5 || dk.substr(dk.size() - 4) != "_dir") continue;
        if (rk.size() < 5 || rk.substr(rk.size() - 4) != "_res") continue;
        out.push_back({dv == "SEND", std::stoi(rv)});
    }
    return out;
}

bool alive_at_end(const TraceBundle& b, int g) {
    const Event* fin = final_event(b, g);
    return fin && fin->kind != EventKind::GoEnd;
}

}  // namespace

Classification classify(const TraceBundle& b) {
    Classification c;
    c.classes[0] = GoClass::Runtime;
    c.function[0] = "<runtime>";
    for (const Event& e : b.events) {
        if (e.kind == EventKind::GoCreate) {
            int child = static_cast<int>(e.value.value_or(-1));
            if (c.parent.count(child))
                c.errors.push_back("goroutine g" + std::to_string(child) + " created twice");
            c.parent[child] = e.g;
        }
        if (e.kind == EventKind::GoStart) c.function[e.g] = top_frame(b, e).func;
        if (e.g != 0 && !c.parent.count(e.g) && e.kind != EventKind::GoCreate) {
            c.errors.push_back("orphan goroutine g" + std::to_string(e.g) +
                               ": no GO_CREATE precedes its first event");
            c.parent[e.g] = -1;
        }
    }
    for (const auto& [g, p] : c.parent) {
        // Application goroutines are those whose creation chain reaches the
        // program entry goroutine (itself spawned by the runtime, g0).
        int cur = g;
        bool app = false;
        while (true) {
            auto it = c.parent.find(cur);
            if (it == c.parent.end() || it->second < 0) break;
            if (it->second == 0) {
                app = true;
                break;
            }
            cur = it->second;
        }
        c.classes[g] = app ? GoClass::Application : GoClass::Runtime;
    }
    return c;
}

std::string resource_label(const TraceBundle& b, ResKind rk, int res_id) {
    std::set<int> ids;
    for (const Event& e : b.events)
        if (e.resource && e.resource->first == rk) ids.insert(e.resource->second);
    int rank = 1;
    for (int id : ids) {
        if (id == res_id) break;
        rank++;
    }
    const char* prefix = "R";
    switch (rk) {
        case ResKind::Chan: prefix = "C"; break;
        case ResKind::Mutex: prefix = "M"; break;
        case ResKind::Wg: prefix = "W"; break;
        case ResKind::Cond: prefix = "V"; break;
    }
    return prefix + std::to_string(rank);
}

LeakReport detect_leaks(const TraceBundle& b) {
    LeakReport report;
    Classification c = classify(b);
    for (const auto& [g, cls] : c.classes) {
        if (cls != GoClass::Application) continue;
        const Event* fin = final_event(b, g);
        if (!fin || fin->kind == EventKind::GoEnd) continue;
        Leak l;
        l.g = g;
        l.function = c.function.count(g) ? c.function[g] : "?";
        l.loc = event_loc(b, *fin);
        if (fin->kind == EventKind::GoBlock) {
            l.kind = LeakKind::Blocked;
            l.reason = reason_from_aux(*fin);
            l.resource = fin->resource;
            if (l.resource && l.resource->first == ResKind::Mutex) {
                int owner = final_owner(b, l.resource->second);
                if (owner != 0) l.holder = owner;
            }
        } else {
            l.kind = LeakKind::Killed;
        }
        report.leaks.push_back(std::move(l));
    }
    return report;
}

std::string describe(const TraceBundle& b, const Leak& l) {
    std::ostringstream os;
    os << l.function << " (g" << l.g << ") ";
    if (l.kind == LeakKind::Killed) {
        os << "killed while runnable at " << l.loc.file << ":" << l.loc.line;
        return os.str();
    }
    os << "blocked " << l.reason;
    if (l.resource)
        os << " on " << resource_label(b, l.resource->first, l.resource->second);
    if (l.holder) {
        Classification c = classify(b);
        os << " held by " << (c.function.count(*l.holder) ? c.function[*l.holder] : "?") << " (g"
           << *l.holder << ")";
    }
    os << " at " << l.loc.file << ":" << l.loc.line;
    return os.str();
}

WaitForGraph build_waitfor(const TraceBundle& b) {
    WaitForGraph g;
    Classification cls = classify(b);

    auto gnode = [](int gid) { return WfgNode{true, gid, ResKind::Chan, 0}; };
    auto rnode = [](ResKind rk, int id) { return WfgNode{false, 0, rk, id}; };
    auto add = [&](WfgNode a, WfgNode bn, WfgEdgeKind k) {
        g.nodes.insert(a);
        g.nodes.insert(bn);
        g.edges.insert({a, bn, k});
    };

    // Dynamic counterpart evidence: which goroutines ever attempted each
    // direction on each channel, signalled each cond, decremented each wg.
    std::map<int, std::set<int>> chan_senders, chan_receivers;
    std::map<int, std::set<int>> cv_signalers;
    std::map<int, std::set<int>> wg_doners;
    for (const Event& e : b.events) {
        if (e.kind == EventKind::ChSendPre)
            chan_senders[e.resource->second].insert(e.g);
        else if (e.kind == EventKind::ChRecvPre)
            chan_receivers[e.resource->second].insert(e.g);
        else if (e.kind == EventKind::SelectPre)
            for (const SelCase& c : select_cases(e))
                (c.is_send ? chan_senders : chan_receivers)[c.chan].insert(e.g);
        else if (e.kind == EventKind::CvSignal || e.kind == EventKind::CvBroadcast)
            cv_signalers[e.resource->second].insert(e.g);
        else if (e.kind == EventKind::WgAdd && e.value.value_or(0) < 0)
            wg_doners[e.resource->second].insert(e.g);
    }

    auto counterparts = [&](const std::map<int, std::set<int>>& evidence, int res, int self) {
        std::vector<int> out;
        auto it = evidence.find(res);
        if (it == evidence.end()) return out;
        for (int other : it->second)
            if (other != self && alive_at_end(b, other)) out.push_back(other);
        return out;
    };

    for (const auto& [gid, klass] : cls.classes) {
        if (klass != GoClass::Application) continue;
        const Event* fin = final_event(b, gid);
        if (!fin || fin->kind != EventKind::GoBlock) continue;
        std::string reason = reason_from_aux(*fin);

        auto chan_edges = [&](int cid, bool blocked_on_send) {
            add(gnode(gid), rnode(ResKind::Chan, cid), WfgEdgeKind::Waits);
            const auto& evidence = blocked_on_send ? chan_receivers : chan_senders;
            for (int other : counterparts(evidence, cid, gid))
                add(rnode(ResKind::Chan, cid), gnode(other), WfgEdgeKind::Counterpart);
        };

        if (reason == "SEND" || reason == "RECV") {
            chan_edges(fin->resource->second, reason == "SEND");
        } else if (reason == "LOCK") {
            int mid = fin->resource->second;
            add(gnode(gid), rnode(ResKind::Mutex, mid), WfgEdgeKind::Waits);
            int owner = final_owner(b, mid);
            if (owner != 0)
                add(rnode(ResKind::Mutex, mid), gnode(owner), WfgEdgeKind::HeldBy);
        } else if (reason == "WGWAIT") {
            int wid = fin->resource->second;
            add(gnode(gid), rnode(ResKind::Wg, wid), WfgEdgeKind::Waits);
            for (int other : counterparts(wg_doners, wid, gid))
                add(rnode(ResKind::Wg, wid), gnode(other), WfgEdgeKind::Counterpart);
        } else if (reason == "CVWAIT") {
            int vid = fin->resource->second;
            add(gnode(gid), rnode(ResKind::Cond, vid), WfgEdgeKind::Waits);
            for (int other : counterparts(cv_signalers, vid, gid))
                add(rnode(ResKind::Cond, vid), gnode(other), WfgEdgeKind::Counterpart);
        } else if (reason == "SELECT") {
            // find this goroutine's last SELECT_PRE for the case list
            const Event* pre = nullptr;
            for (const Event& e : b.events)
                if (e.g == gid && e.kind == EventKind::SelectPre) pre = &e;
            if (pre)
                for (const SelCase& c : select_cases(*pre)) chan_edges(c.chan, c.is_send);
        }
    }
    return g;
}

std::vector<std::vector<WfgNode>> find_cycles(const WaitForGraph& g) {
    std::vector<WfgNode> nodes(g.nodes.begin(), g.nodes.end());
    std::map<WfgNode, std::vector<WfgNode>> succ;
    for (const WfgEdge& e : g.edges) succ[e.from].push_back(e.to);

    std::set<std::vector<WfgNode>> found;
    std::vector<WfgNode> path;
    std::set<WfgNode> on_path;

    // Enumerate simple cycles whose smallest node is the DFS root; graphs here
    // are tiny, so the exponential worst case is irrelevant.
    auto dfs = [&](auto&& self, const WfgNode& root, const WfgNode& cur) -> void {
        path.push_back(cur);
        on_path.insert(cur);
        for (const WfgNode& next : succ[cur]) {
            if (next == root) {
                found.insert(path);
            } else if (!on_path.count(next) && root < next) {
                self(self, root, next);
            }
        }
        on_path.erase(cur);
        path.pop_back();
    };

    for (const WfgNode& root : nodes) dfs(dfs, root, root);
    return {found.begin(), found.end()};
}

std::string wfg_node_label(const TraceBundle& b, const WfgNode& n) {
    if (n.is_goroutine) {
        Classification c = classify(b);
        std::string fn = c.function.count(n.g) ? c.function[n.g] : "?";
        return fn + "(g" + std::to_string(n.g) + ")";
    }
    return resource_label(b, n.rk, n.res_id);
}

std::vector<SyncEdge> sync_edges(const TraceBundle& b) {
    std::vector<SyncEdge> out;
    auto cross = [&](int from, int to, SyncEdgeKind k) {
        if (b.events[static_cast<size_t>(from)].g != b.events[static_cast<size_t>(to)].g)
            out.push_back({from, to, k});
    };

    std::map<int, int> create_of;  // child goroutine -> GO_CREATE event id
    std::map<int, std::vector<int>> pending_sends;  // channel -> SEND_POST queue
    std::map<int, int> close_ev;                    // channel -> CH_CLOSE event id
    std::map<int, int> last_unlock;                 // mutex -> MU_UNLOCK event id
    std::map<int, std::vector<int>> neg_adds;       // wg -> negative WG_ADD event ids
    std::map<int, int> last_cv_wake;                // cond -> CV_SIGNAL/BROADCAST event id

    for (const Event& e : b.events) {
        int res = e.resource ? e.resource->second : -1;
        switch (e.kind) {
            case EventKind::GoCreate:
                create_of[static_cast<int>(e.value.value_or(-1))] = e.id;
                break;
            case EventKind::GoStart: {
                auto it = create_of.find(e.g);
                if (it != create_of.end()) cross(it->second, e.id, SyncEdgeKind::CreateStart);
                break;
            }
            case EventKind::ChSendPost:
                pending_sends[res].push_back(e.id);
                break;
            case EventKind::ChRecvPost: {
                auto& q = pending_sends[res];
                if (!q.empty()) {
                    cross(q.front(), e.id, SyncEdgeKind::ChanPair);
                    q.erase(q.begin());
                } else if (close_ev.count(res)) {
                    cross(close_ev[res], e.id, SyncEdgeKind::Close);
                }
                break;
            }
            case EventKind::ChClose:
                close_ev[res] = e.id;
                break;
            case EventKind::MuLockPost: {
                auto it = last_unlock.find(res);
                if (it != last_unlock.end()) cross(it->second, e.id, SyncEdgeKind::Mutex);
                break;
            }
            case EventKind::MuUnlock:
                last_unlock[res] = e.id;
                break;
            case EventKind::WgAdd:
                if (e.value.value_or(0) < 0) neg_adds[res].push_back(e.id);
                break;
            case EventKind::WgWaitPost:
                // conservative: every prior decrement may have been the one
                // that released the waiter
                for (int a : neg_adds[res]) cross(a, e.id, SyncEdgeKind::Wg);
                break;
            case EventKind::CvSignal:
            case EventKind::CvBroadcast:
                last_cv_wake[res] = e.id;
                break;
            case EventKind::CvWaitPost: {
                auto it = last_cv_wake.find(res);
                if (it != last_cv_wake.end()) cross(it->second, e.id, SyncEdgeKind::Cv);
                break;
            }
            default:
                break;
        }
    }
    return out;
}

std::vector<VectorClock> vector_clocks(const TraceBundle& b) {
    std::map<int, std::vector<int>> incoming;  // event id -> source event ids
    for (const SyncEdge& e : sync_edges(b)) incoming[e.to].push_back(e.from);

    std::vector<VectorClock> clocks(b.events.size());
    std::map<int, VectorClock> last_of_g;
    for (const Event& e : b.events) {
        VectorClock vc = last_of_g[e.g];
        vc[e.g]++;
        auto it = incoming.find(e.id);
        if (it != incoming.end()) {
            for (int src : it->second)
                for (const auto& [g, t] : clocks[static_cast<size_t>(src)])
                    vc[g] = std::max(vc[g], t);
        }
        clocks[static_cast<size_t>(e.id)] = vc;
        last_of_g[e.g] = std::move(vc);
    }
    return clocks;
}

bool hb_leq(const VectorClock& a, const VectorClock& b) {
    if (a == b) return false;
    for (const auto& [g, t] : a) {
        auto it = b.find(g);
        if (it == b.end() || it->second < t) return false;
    }
    return true;
}

std::string export_shiviz(const TraceBundle& b) {
    auto clocks = vector_clocks(b);
    std::ostringstream os;
    os << "(?<host>\\S+) (?<event>.*)\\n(?<clock>{.*})\n\n";
    for (const Event& e : b.events) {
        SourceLoc loc = event_loc(b, e);
        os << "g" << e.g << " " << event_kind_name(e.kind) << "@" << loc.file << ":" << loc.line
           << "\n";
        nlohmann::json clock;
        for (const auto& [g, t] : clocks[static_cast<size_t>(e.id)])
            clock["g" + std::to_string(g)] = t;
        os << clock.dump() << "\n";
    }
    return os.str();
}

std::string export_dot(const TraceBundle& b, const WaitForGraph& g) {
    std::ostringstream os;
    os << "digraph waitfor {\n";
    for (const WfgNode& n : g.nodes) {
        os << "  \"" << wfg_node_label(b, n) << "\" [shape="
           << (n.is_goroutine ? "box" : "ellipse") << "];\n";
    }
    for (const WfgEdge& e : g.edges) {
        const char* label = e.kind == WfgEdgeKind::Waits     ? "WAITS"
                            : e.kind == WfgEdgeKind::HeldBy ? "HELD_BY"
                                                            : "COUNTERPART";
        os << "  \"" << wfg_node_label(b, e.from) << "\" -> \"" << wfg_node_label(b, e.to)
           << "\" [label=" << label << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string lane_view(const TraceBundle& b) {
    std::set<int> gs;
    for (const Event& e : b.events)
        if (is_concurrency_event(e.kind)) gs.insert(e.g);
    std::vector<int> lanes(gs.begin(), gs.end());
    constexpr int width = 24;

    std::ostringstream os;
    for (int g : lanes) {
        std::string h = "g" + std::to_string(g);
        os << h << std::string(width > static_cast<int>(h.size())
                                   ? static_cast<size_t>(width) - h.size()
                                   : 1,
                               ' ');
    }
    os << "\n";
    for (const Event& e : b.events) {
        if (!is_concurrency_event(e.kind)) continue;
        std::string cell = event_kind_name(e.kind);
        if (e.resource)
            cell += "(" + resource_label(b, e.resource->first, e.resource->second) + ")";
        if (is_pre_event(e.kind)) cell += "?";
        else if (is_post_event(e.kind)) cell += "!";
        for (int g : lanes) {
            std::string text = g == e.g ? cell : "";
            os << text
               << std::string(width > static_cast<int>(text.size())
                                  ? static_cast<size_t>(width) - text.size()
                                  : 1,
                              ' ');
        }
        os << "\n";
    }
    return os.str();
}

std::vector<SourceLoc> critical_points(const TraceBundle& b) {
    std::set<SourceLoc> locs;
    for (const Event& e : b.events)
        if (is_concurrency_event(e.kind)) locs.insert(event_loc(b, e));
    return {locs.begin(), locs.end()};
}

std::vector<std::string> lint_trace(const TraceBundle& b) {
    std::vector<std::string> bad;
    auto note = [&](const Event& e, const std::string& msg) {
        bad.push_back("event " + std::to_string(e.id) + " (" + event_kind_name(e.kind) + ", g" +
                      std::to_string(e.g) + "): " + msg);
    };

    std::int64_t last_ts = -1;
    std::map<int, std::optional<Event>> open;  // per-goroutine open pre event
    for (const Event& e : b.events) {
        if (e.ts <= last_ts) note(e, "timestamp not strictly increasing");
        last_ts = e.ts;

        auto& o = open[e.g];
        if (is_pre_event(e.kind)) {
            if (o) note(e, "pre event while " + std::string(event_kind_name(o->kind)) +
                               " is still open");
            o = e;
        } else if (is_post_event(e.kind)) {
            if (!o) {
                note(e, "post event without a matching pre");
            } else {
                if (post_of(o->kind) != e.kind)
                    note(e, "post does not match open pre " + std::string(event_kind_name(o->kind)));
                else if (o->resource && e.resource && *o->resource != *e.resource)
                    note(e, "post resource differs from its pre");
                o.reset();
            }
        } else if (e.kind == EventKind::GoBlock) {
            if (!o) note(e, "block without an open pre event");
        } else if (e.kind == EventKind::GoEnd) {
            if (o) note(e, "goroutine ended with an open pre event");
        }
    }
    if (!b.events.empty()) {
        if (b.events.front().kind != EventKind::RunBegin)
            note(b.events.front(), "trace does not start with RUN_BEGIN");
        if (b.events.back().kind != EventKind::RunEnd)
            note(b.events.back(), "trace does not end with RUN_END");
    }
    return bad;
}

}  // namespace ectsim
