#include "ectsim/runtime.hpp"

#include <cassert>
#include <deque>
#include <random>
#include <stdexcept>

namespace ectsim {

const char* sched_policy_name(SchedPolicy p) {
    switch (p) {
        case SchedPolicy::Fifo: return "fifo";
        case SchedPolicy::Random: return "random";
        case SchedPolicy::DelayInject: return "delay";
    }
    return "?";
}

std::optional<SchedPolicy> sched_policy_from_name(const std::string& s) {
    if (s == "fifo") return SchedPolicy::Fifo;
    if (s == "random") return SchedPolicy::Random;
    if (s == "delay") return SchedPolicy::DelayInject;
    return std::nullopt;
}

const char* fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::SendOnClosed: return "send-on-closed";
        case FaultKind::CloseOfClosed: return "close-of-closed";
        case FaultKind::UnlockNotOwner: return "unlock-not-owner";
        case FaultKind::NegativeWgCounter: return "negative-wg-counter";
        case FaultKind::CvWaitWithoutLock: return "cwait-without-lock";
        case FaultKind::DivisionByZero: return "division-by-zero";
    }
    return "?";
}

const char* go_status_name(GoStatus s) {
    switch (s) {
        case GoStatus::Runnable: return "RUNNABLE";
        case GoStatus::Blocked: return "BLOCKED";
        case GoStatus::Done: return "DONE";
        case GoStatus::Killed: return "KILLED";
    }
    return "?";
}

std::string RunOutcome::status_str() const {
    switch (status) {
        case RunStatus::Completed: return "COMPLETED";
        case RunStatus::GlobalDeadlock: return "GLOBAL_DEADLOCK";
        case RunStatus::WatchdogTimeout: return "WATCHDOG_TIMEOUT";
        case RunStatus::Fault:
            return std::string("FAULT:") + fault_kind_name(fault->kind) + "@" + fault->loc.file +
                   ":" + std::to_string(fault->loc.line) + ":g" + std::to_string(fault->g);
    }
    return "?";
}

namespace {

struct Value {
    VarKind kind = VarKind::Int;
    std::int64_t i = 0;  // Int payload
    int res = 0;         // resource id for handle kinds
};

struct Waiter {
    int g = 0;
    std::int64_t value = 0;    // pending send value
    std::string target;        // pending recv target variable
    int select_case = -1;      // >= 0 when registered by a blocked select
    SourceLoc loc;             // source of the pending operation
};

struct Channel {
    int id = 0;
    std::int64_t cap = 0;
    std::deque<std::int64_t> buf;
    bool closed = false;
    std::deque<Waiter> senders;
    std::deque<Waiter> receivers;
};

struct Mutex {
    int id = 0;
    int owner = 0;  // 0 = unowned
    std::deque<Waiter> waiters;
};

struct WaitGroup {
    int id = 0;
    std::int64_t counter = 0;
    std::deque<Waiter> waiters;
};

struct CondVar {
    int id = 0;
    int mutex_id = 0;
    std::deque<Waiter> waiters;
};

enum class FrameKind { Plain, Loop, For };

struct Frame {
    const std::vector<StmtPtr>* stmts = nullptr;
    size_t idx = 0;
    FrameKind kind = FrameKind::Plain;
    const Stmt* owner = nullptr;  // the Loop/For statement
    std::string var;
    std::int64_t cur = 0, end = 0;
};

struct Pending {
    const Stmt* stmt = nullptr;  // nullptr: function body exhausted
    bool spin = false;           // empty `loop` body: one no-op turn per decision
};

struct Goroutine {
    int id = 0, parent = 0;
    const FuncDecl* fn = nullptr;
    std::map<std::string, Value> locals;
    std::vector<Frame> frames;
    GoStatus status = GoStatus::Runnable;
    BlockReason reason = BlockReason::Send;
    std::optional<std::pair<ResKind, int>> blocked_on;
    bool started = false;
    bool yielded = false;
    bool backedge_pending = false;
    int delay = 0;  // remaining decisions to skip (DELAY_INJECT)
    std::vector<int> wait_channels;  // channels a blocked select registered on
    const Stmt* blocked_select = nullptr;
    std::optional<Pending> pending;
};

struct FaultSignal {
    Fault fault;
};

enum class Sig { Cont, Sched, Yield, Block, Ended, MainEnd, Fault };

int reason_code(BlockReason r) { return static_cast<int>(r); }

class Interp {
  public:
    Interp(const Program& prog, const SchedulerConfig& cfg, std::optional<std::int64_t> arg0)
        : prog_(prog), cfg_(cfg), arg0_(arg0), rng_(cfg.seed) {
        for (const auto& loc : cfg.critical_points)
            critical_.insert({loc.file, loc.line});
    }

    RunResult run() {
        emit_runtime(EventKind::RunBegin);
        spawn(*prog_.entry(), 0, {});
        int last_running = -1;
        for (;;) {
            if (steps_ >= cfg_.max_steps) {
                result_.outcome.status = RunStatus::WatchdogTimeout;
                break;
            }
            std::vector<int> runnables;
            for (auto& [id, g] : gors_)
                if (g.status == GoStatus::Runnable) runnables.push_back(id);
            if (runnables.empty()) {
                result_.outcome.status = RunStatus::GlobalDeadlock;
                break;
            }
            int gid = pick_next(runnables);
            steps_++;
            Goroutine& g = gors_.at(gid);
            if (!g.started) {
                g.started = true;
                emit(g.id, EventKind::GoStart, {}, {}, {}, pending_loc(g), g.fn->name);
            } else if (gid != last_running) {
                emit(g.id, EventKind::SchedSwitch, {}, {}, {}, pending_loc(g), g.fn->name);
            }
            last_running = gid;
            Sig sig;
            try {
                sig = run_slice(g);
            } catch (const FaultSignal& f) {
                result_.outcome.fault = f.fault;
                result_.outcome.status = RunStatus::Fault;
                break;
            }
            if (sig == Sig::MainEnd) {
                for (auto& [id, other] : gors_)
                    if (other.status == GoStatus::Runnable || other.status == GoStatus::Blocked)
                        other.status = GoStatus::Killed;
                result_.outcome.status = RunStatus::Completed;
                break;
            }
        }
        emit_runtime(EventKind::RunEnd);
        result_.outcome.steps = steps_;
        for (const auto& [id, g] : gors_) result_.outcome.final_status[id] = g.status;
        return std::move(result_);
    }

  private:
    const Program& prog_;
    const SchedulerConfig& cfg_;
    std::optional<std::int64_t> arg0_;
    std::mt19937_64 rng_;
    std::set<std::pair<std::string, int>> critical_;

    RunResult result_;
    std::map<int, Goroutine> gors_;
    std::map<int, Channel> chans_;
    std::map<int, Mutex> mutexes_;
    std::map<int, WaitGroup> wgs_;
    std::map<int, CondVar> conds_;
    int next_gid_ = 1;
    int next_rid_ = 1;
    std::int64_t steps_ = 0;
    std::int64_t ts_ = 0;
    std::deque<int> fifo_;
    int current_ = -1;

    // ------------------------------------------------------------------
    // Events
    // ------------------------------------------------------------------

    int emit(int g, EventKind kind, std::optional<std::pair<ResKind, int>> res,
             std::optional<std::int64_t> value, std::optional<std::int64_t> aux,
             const SourceLoc& loc, const std::string& func,
             std::vector<std::pair<std::string, std::string>> args = {}) {
        Event e;
        e.id = static_cast<int>(result_.events.size());
        e.ts = ++ts_;
        e.g = g;
        e.kind = kind;
        e.resource = res;
        e.value = value;
        e.aux = aux;
        e.stack_id = result_.stacks.intern({{func, loc.file, loc.line}});
        e.args = std::move(args);
        result_.events.push_back(std::move(e));
        return result_.events.back().id;
    }

    void emit_runtime(EventKind kind) {
        emit(0, kind, {}, {}, {}, {prog_.file, 1, 1}, "<runtime>");
    }

    [[noreturn]] void fault(FaultKind kind, const SourceLoc& loc, int g) {
        throw FaultSignal{Fault{kind, loc, g}};
    }

    // ------------------------------------------------------------------
    // Goroutine bookkeeping
    // ------------------------------------------------------------------

    int spawn(const FuncDecl& fn, int parent, std::map<std::string, Value> locals) {
        int id = next_gid_++;
        Goroutine g;
        g.id = id;
        g.parent = parent;
        g.fn = &fn;
        g.locals = std::move(locals);
        if (id == 1 && fn.name == "main") {
            Value v;
            v.i = arg0_.value_or(0);
            g.locals["ARG0"] = v;
        }
        g.frames.push_back(Frame{&fn.body, 0, FrameKind::Plain, nullptr, "", 0, 0});
        gors_[id] = std::move(g);
        SourceLoc loc = parent == 0 ? SourceLoc{prog_.file, 1, 1} : SourceLoc{};
        if (parent == 0) {
            emit(0, EventKind::GoCreate, {}, id, {}, loc, "<runtime>");
        }
        fifo_.push_back(id);
        return id;
    }

    void make_runnable(Goroutine& g) {
        g.status = GoStatus::Runnable;
        g.blocked_on.reset();
        g.blocked_select = nullptr;
        fifo_.push_back(g.id);
    }

    // ------------------------------------------------------------------
    // Statement cursor
    // ------------------------------------------------------------------

    Pending peek(Goroutine& g) {
        if (g.pending) return *g.pending;
        Pending p;
        while (!g.frames.empty()) {
            Frame& f = g.frames.back();
            if (f.idx < f.stmts->size()) {
                p.stmt = (*f.stmts)[f.idx].get();
                break;
            }
            if (f.kind == FrameKind::Loop) {
                g.backedge_pending = true;
                if (f.stmts->empty()) {
                    p.stmt = f.owner;
                    p.spin = true;
                    break;
                }
                f.idx = 0;
                continue;
            }
            if (f.kind == FrameKind::For) {
                f.cur++;
                if (f.cur < f.end) {
                    g.backedge_pending = true;
                    f.idx = 0;
                    g.locals[f.var].i = f.cur;
                    g.locals[f.var].kind = VarKind::Int;
                    continue;
                }
            }
            g.frames.pop_back();
        }
        g.pending = p;
        return p;
    }

    void consume(Goroutine& g) {
        assert(g.pending && g.pending->stmt);
        if (!g.pending->spin) g.frames.back().idx++;
        g.pending.reset();
    }

    SourceLoc pending_loc(Goroutine& g) {
        Pending p = peek(g);
        return p.stmt ? p.stmt->loc : g.fn->loc;
    }

    static bool is_sched_point(const Stmt& s) {
        switch (s.kind) {
            case StmtKind::MakeChan:
            case StmtKind::Go:
            case StmtKind::Send:
            case StmtKind::Recv:
            case StmtKind::Close:
            case StmtKind::Lock:
            case StmtKind::Unlock:
            case StmtKind::WgAdd:
            case StmtKind::WgDone:
            case StmtKind::WgWait:
            case StmtKind::CvWait:
            case StmtKind::CvSignal:
            case StmtKind::CvBroadcast:
            case StmtKind::Select:
            case StmtKind::Yield:
                return true;
            // Return is not a pre-break: the return and the goroutine's end
            // event happen in one slice, and the scheduling decision follows.
            // Otherwise a goroutine whose last real action releases main could
            // be killed between that action and its end event, turning every
            // clean shutdown into a spurious leak.
            default:
                return false;
        }
    }

    // ------------------------------------------------------------------
    // Scheduler
    // ------------------------------------------------------------------

    std::uint64_t rand_below(std::uint64_t n) { return n <= 1 ? 0 : rng_() % n; }

    bool coin(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        double u = static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
        return u < p;
    }

    bool at_critical_point(Goroutine& g) {
        Pending p = peek(g);
        if (!p.stmt || p.spin) return false;
        return critical_.count({p.stmt->loc.file, p.stmt->loc.line}) > 0;
    }

    int pick_next(const std::vector<int>& runnables) {
        if (cfg_.policy == SchedPolicy::Fifo) return pick_fifo(runnables);
        if (cfg_.policy == SchedPolicy::Random)
            return runnables[rand_below(runnables.size())];
        return pick_delay(runnables);
    }

    int pick_fifo(const std::vector<int>& runnables) {
        (void)runnables;
        if (current_ != -1) {
            auto it = gors_.find(current_);
            if (it != gors_.end() && it->second.status == GoStatus::Runnable &&
                !it->second.yielded) {
                return current_;
            }
            if (it != gors_.end() && it->second.yielded) {
                it->second.yielded = false;
                fifo_.push_back(current_);
            }
        }
        while (!fifo_.empty()) {
            int id = fifo_.front();
            fifo_.pop_front();
            auto it = gors_.find(id);
            if (it != gors_.end() && it->second.status == GoStatus::Runnable) {
                current_ = id;
                return id;
            }
        }
        // Runnable set is non-empty, so this is unreachable in practice.
        current_ = runnables.front();
        return current_;
    }

    int pick_delay(const std::vector<int>& runnables) {
        std::vector<int> eligible;
        for (int id : runnables) {
            Goroutine& g = gors_.at(id);
            if (g.delay == 0) eligible.push_back(id);
            else g.delay--;  // being skipped this decision
        }
        if (eligible.empty()) {
            int id = runnables[rand_below(runnables.size())];
            gors_.at(id).delay = 0;
            return id;
        }
        while (!eligible.empty()) {
            size_t i = rand_below(eligible.size());
            int id = eligible[i];
            Goroutine& g = gors_.at(id);
            if (runnables.size() > 1 && at_critical_point(g) && coin(cfg_.yield_probability)) {
                g.delay = cfg_.delay_bound;
                eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(i));
                continue;
            }
            return id;
        }
        int id = runnables[rand_below(runnables.size())];
        gors_.at(id).delay = 0;
        return id;
    }

    // ------------------------------------------------------------------
    // Expressions
    // ------------------------------------------------------------------

    std::int64_t eval(Goroutine& g, const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLit:
                return e.value;
            case ExprKind::Var: {
                auto it = g.locals.find(e.name);
                if (it == g.locals.end())
                    throw std::logic_error("unbound variable " + e.name);
                return it->second.i;
            }
            case ExprKind::Unary: {
                std::int64_t v = eval(g, *e.lhs);
                return e.op == "-" ? -v : (v == 0 ? 1 : 0);
            }
            case ExprKind::Binary: {
                if (e.op == "&&") return eval(g, *e.lhs) != 0 && eval(g, *e.rhs) != 0;
                if (e.op == "||") return eval(g, *e.lhs) != 0 || eval(g, *e.rhs) != 0;
                std::int64_t a = eval(g, *e.lhs), b = eval(g, *e.rhs);
                if (e.op == "+") return a + b;
                if (e.op == "-") return a - b;
                if (e.op == "*") return a * b;
                if (e.op == "/" || e.op == "%") {
                    if (b == 0) fault(FaultKind::DivisionByZero, e.loc, g.id);
                    return e.op == "/" ? a / b : a % b;
                }
                if (e.op == "==") return a == b;
                if (e.op == "!=") return a != b;
                if (e.op == "<") return a < b;
                if (e.op == "<=") return a <= b;
                if (e.op == ">") return a > b;
                if (e.op == ">=") return a >= b;
                throw std::logic_error("unknown operator " + e.op);
            }
        }
        return 0;
    }

    Value& handle(Goroutine& g, const std::string& name) { return g.locals.at(name); }

    Channel& chan_of(Goroutine& g, const std::string& name) {
        return chans_.at(handle(g, name).res);
    }
    Mutex& mutex_of(Goroutine& g, const std::string& name) {
        return mutexes_.at(handle(g, name).res);
    }
    WaitGroup& wg_of(Goroutine& g, const std::string& name) {
        return wgs_.at(handle(g, name).res);
    }
    CondVar& cond_of(Goroutine& g, const std::string& name) {
        return conds_.at(handle(g, name).res);
    }

    // ------------------------------------------------------------------
    // Wake helpers: the waking goroutine completes the blocked op on behalf
    // of the waiter, emitting the waiter's events and making it runnable.
    // ------------------------------------------------------------------

    void cancel_select_waits(Goroutine& g) {
        for (int cid : g.wait_channels) {
            auto& ch = chans_.at(cid);
            auto strip = [&](std::deque<Waiter>& q) {
                for (auto it = q.begin(); it != q.end();) {
                    if (it->g == g.id) it = q.erase(it);
                    else ++it;
                }
            };
            strip(ch.senders);
            strip(ch.receivers);
        }
        g.wait_channels.clear();
    }

    void store_recv(Goroutine& g, const std::string& target, std::int64_t v) {
        if (!target.empty()) {
            Value val;
            val.i = v;
            g.locals[target] = val;
            if (g.id == 1 && target == "OUT") result_.outcome.outputs.push_back(v);
        }
    }

    // Wake a receiver blocked on channel ch with value v.
    void wake_receiver(Channel& ch, Waiter w, std::int64_t v, int trigger_id) {
        Goroutine& g = gors_.at(w.g);
        emit(g.id, EventKind::GoUnblock, {{ResKind::Chan, ch.id}}, {}, trigger_id, w.loc,
             g.fn->name);
        if (w.select_case >= 0) {
            const Stmt* sel = g.blocked_select;
            cancel_select_waits(g);
            emit(g.id, EventKind::SelectPost, {}, {}, w.select_case, sel->loc, g.fn->name);
            const SelectCase& c = sel->cases[static_cast<size_t>(w.select_case)];
            emit(g.id, EventKind::ChRecvPre, {{ResKind::Chan, ch.id}}, {}, {}, c.loc, g.fn->name);
            emit(g.id, EventKind::ChRecvPost, {{ResKind::Chan, ch.id}}, v, {}, c.loc, g.fn->name);
            store_recv(g, c.recv_target, v);
            make_runnable(g);
            g.frames.push_back(Frame{&c.body, 0, FrameKind::Plain, nullptr, "", 0, 0});
            g.pending.reset();
        } else {
            emit(g.id, EventKind::ChRecvPost, {{ResKind::Chan, ch.id}}, v, {}, w.loc, g.fn->name);
            store_recv(g, w.target, v);
            make_runnable(g);
        }
    }

    // Wake a sender blocked on channel ch; its value has already been consumed
    // (rendezvous) or moved into the buffer by the caller.
    void wake_sender(Channel& ch, Waiter w, int trigger_id) {
        Goroutine& g = gors_.at(w.g);
        emit(g.id, EventKind::GoUnblock, {{ResKind::Chan, ch.id}}, {}, trigger_id, w.loc,
             g.fn->name);
        if (w.select_case >= 0) {
            const Stmt* sel = g.blocked_select;
            cancel_select_waits(g);
            emit(g.id, EventKind::SelectPost, {}, {}, w.select_case, sel->loc, g.fn->name);
            const SelectCase& c = sel->cases[static_cast<size_t>(w.select_case)];
            emit(g.id, EventKind::ChSendPre, {{ResKind::Chan, ch.id}}, {}, {}, c.loc, g.fn->name);
            emit(g.id, EventKind::ChSendPost, {{ResKind::Chan, ch.id}}, w.value, {}, c.loc,
                 g.fn->name);
            make_runnable(g);
            g.frames.push_back(Frame{&c.body, 0, FrameKind::Plain, nullptr, "", 0, 0});
            g.pending.reset();
        } else {
            emit(g.id, EventKind::ChSendPost, {{ResKind::Chan, ch.id}}, w.value, {}, w.loc,
                 g.fn->name);
            make_runnable(g);
        }
    }

    // ------------------------------------------------------------------
    // Channel operations (shared between plain statements and select cases)
    // ------------------------------------------------------------------

    // Returns true if completed, false if the caller must block.
    bool try_send(Goroutine& g, Channel& ch, std::int64_t v, const SourceLoc& loc) {
        if (ch.closed) fault(FaultKind::SendOnClosed, loc, g.id);
        if (!ch.receivers.empty()) {
            Waiter w = ch.receivers.front();
            ch.receivers.pop_front();
            int post = emit(g.id, EventKind::ChSendPost, {{ResKind::Chan, ch.id}}, v, {}, loc,
                            g.fn->name);
            wake_receiver(ch, w, v, post);
            return true;
        }
        if (static_cast<std::int64_t>(ch.buf.size()) < ch.cap) {
            ch.buf.push_back(v);
            emit(g.id, EventKind::ChSendPost, {{ResKind::Chan, ch.id}}, v, {}, loc, g.fn->name);
            return true;
        }
        return false;
    }

    // Returns the received value, or nullopt if the caller must block.
    std::optional<std::int64_t> try_recv(Goroutine& g, Channel& ch, const SourceLoc& loc) {
        if (!ch.buf.empty()) {
            std::int64_t v = ch.buf.front();
            ch.buf.pop_front();
            int post = emit(g.id, EventKind::ChRecvPost, {{ResKind::Chan, ch.id}}, v, {}, loc,
                            g.fn->name);
            if (!ch.senders.empty()) {
                // a sender was waiting for buffer space; move its value in
                Waiter w = ch.senders.front();
                ch.senders.pop_front();
                ch.buf.push_back(w.value);
                wake_sender(ch, w, post);
            }
            return v;
        }
        if (!ch.senders.empty()) {
            // rendezvous: the k-th send-post precedes the k-th recv-post
            Waiter w = ch.senders.front();
            ch.senders.pop_front();
            std::int64_t v = w.value;
            int pre_id = static_cast<int>(result_.events.size()) - 1;
            wake_sender(ch, w, pre_id);
            emit(g.id, EventKind::ChRecvPost, {{ResKind::Chan, ch.id}}, v, {}, loc, g.fn->name);
            return v;
        }
        if (ch.closed) {
            emit(g.id, EventKind::ChRecvPost, {{ResKind::Chan, ch.id}}, 0, {}, loc, g.fn->name);
            return 0;
        }
        return std::nullopt;
    }

    bool send_ready(const Channel& ch) const {
        return ch.closed || !ch.receivers.empty() ||
               static_cast<std::int64_t>(ch.buf.size()) < ch.cap;
    }
    bool recv_ready(const Channel& ch) const {
        return ch.closed || !ch.buf.empty() || !ch.senders.empty();
    }

    void block(Goroutine& g, BlockReason reason, std::optional<std::pair<ResKind, int>> res,
               const SourceLoc& loc) {
        emit(g.id, EventKind::GoBlock, res, {}, reason_code(reason), loc, g.fn->name);
        g.status = GoStatus::Blocked;
        g.reason = reason;
        g.blocked_on = res;
    }

    // Grant the mutex to g or enqueue it; MU_LOCK_PRE has already been emitted.
    // Returns true if acquired.
    bool acquire_or_wait(Goroutine& g, Mutex& m, const SourceLoc& loc) {
        if (m.owner == 0) {
            m.owner = g.id;
            emit(g.id, EventKind::MuLockPost, {{ResKind::Mutex, m.id}}, {}, {}, loc, g.fn->name);
            return true;
        }
        block(g, BlockReason::Lock, {{ResKind::Mutex, m.id}}, loc);
        m.waiters.push_back(Waiter{g.id, 0, "", -1, loc});
        return false;
    }

    void do_unlock(Goroutine& g, Mutex& m, const SourceLoc& loc) {
        if (m.owner != g.id) fault(FaultKind::UnlockNotOwner, loc, g.id);
        m.owner = 0;
        int ev = emit(g.id, EventKind::MuUnlock, {{ResKind::Mutex, m.id}}, {}, {}, loc, g.fn->name);
        if (!m.waiters.empty()) {
            Waiter w = m.waiters.front();
            m.waiters.pop_front();
            Goroutine& wg = gors_.at(w.g);
            m.owner = wg.id;
            emit(wg.id, EventKind::GoUnblock, {{ResKind::Mutex, m.id}}, {}, ev, w.loc,
                 wg.fn->name);
            emit(wg.id, EventKind::MuLockPost, {{ResKind::Mutex, m.id}}, {}, {}, w.loc,
                 wg.fn->name);
            make_runnable(wg);
        }
    }

    // ------------------------------------------------------------------
    // Statement execution
    // ------------------------------------------------------------------

    Sig run_slice(Goroutine& g) {
        bool first = true;
        for (;;) {
            Pending p = peek(g);
            if (!p.stmt) {
                emit(g.id, EventKind::GoEnd, {}, {}, {}, g.fn->loc, g.fn->name);
                g.status = GoStatus::Done;
                return g.id == 1 ? Sig::MainEnd : Sig::Ended;
            }
            if (!first && (g.backedge_pending || p.spin || is_sched_point(*p.stmt)))
                return Sig::Sched;
            first = false;
            g.backedge_pending = false;
            if (p.spin) {
                g.pending.reset();
                continue;
            }
            consume(g);
            Sig s = exec(g, *p.stmt);
            if (s == Sig::Yield) {
                g.yielded = cfg_.policy == SchedPolicy::Fifo;
                return Sig::Sched;
            }
            if (s != Sig::Cont) return s;
        }
    }

    Sig exec(Goroutine& g, const Stmt& s) {
        switch (s.kind) {
            case StmtKind::Assign: {
                if (s.expr->kind == ExprKind::Var) {
                    // handle aliasing: copying a resource variable rebinds it
                    auto it = g.locals.find(s.expr->name);
                    if (it == g.locals.end())
                        throw std::logic_error("unbound variable " + s.expr->name);
                    g.locals[s.target] = it->second;
                    return Sig::Cont;
                }
                Value v;
                v.i = eval(g, *s.expr);
                g.locals[s.target] = v;
                return Sig::Cont;
            }
            case StmtKind::MakeChan: {
                std::int64_t cap = s.expr ? eval(g, *s.expr) : 0;
                if (cap < 0) cap = 0;
                int id = next_rid_++;
                Channel ch;
                ch.id = id;
                ch.cap = cap;
                chans_[id] = std::move(ch);
                Value v;
                v.kind = VarKind::Chan;
                v.res = id;
                g.locals[s.target] = v;
                emit(g.id, EventKind::ChMake, {{ResKind::Chan, id}}, cap, {}, s.loc, g.fn->name);
                return Sig::Cont;
            }
            case StmtKind::MakeMutex: {
                int id = next_rid_++;
                mutexes_[id] = Mutex{id, 0, {}};
                Value v;
                v.kind = VarKind::Mutex;
                v.res = id;
                g.locals[s.target] = v;
                return Sig::Cont;
            }
            case StmtKind::MakeWg: {
                int id = next_rid_++;
                wgs_[id] = WaitGroup{id, 0, {}};
                Value v;
                v.kind = VarKind::Wg;
                v.res = id;
                g.locals[s.target] = v;
                return Sig::Cont;
            }
            case StmtKind::MakeCond: {
                int id = next_rid_++;
                conds_[id] = CondVar{id, handle(g, s.aux_name).res, {}};
                Value v;
                v.kind = VarKind::Cond;
                v.res = id;
                g.locals[s.target] = v;
                return Sig::Cont;
            }
            case StmtKind::Go: {
                const FuncDecl* callee = prog_.find(s.callee);
                std::map<std::string, Value> locals;
                for (size_t i = 0; i < s.args.size(); i++) {
                    const Param& prm = callee->params[i];
                    if (prm.kind == VarKind::Int) {
                        Value v;
                        v.i = eval(g, *s.args[i]);
                        locals[prm.name] = v;
                    } else {
                        locals[prm.name] = handle(g, s.args[i]->name);
                    }
                }
                spawn_child(*callee, g.id, std::move(locals), s.loc);
                return Sig::Cont;
            }
            case StmtKind::Send: {
                Channel& ch = chan_of(g, s.res);
                std::int64_t v = eval(g, *s.expr);
                emit(g.id, EventKind::ChSendPre, {{ResKind::Chan, ch.id}}, {}, {}, s.loc,
                     g.fn->name);
                if (try_send(g, ch, v, s.loc)) return Sig::Cont;
                block(g, BlockReason::Send, {{ResKind::Chan, ch.id}}, s.loc);
                ch.senders.push_back(Waiter{g.id, v, "", -1, s.loc});
                return Sig::Block;
            }
            case StmtKind::Recv: {
                Channel& ch = chan_of(g, s.res);
                emit(g.id, EventKind::ChRecvPre, {{ResKind::Chan, ch.id}}, {}, {}, s.loc,
                     g.fn->name);
                if (auto v = try_recv(g, ch, s.loc)) {
                    store_recv(g, s.target, *v);
                    return Sig::Cont;
                }
                block(g, BlockReason::Recv, {{ResKind::Chan, ch.id}}, s.loc);
                ch.receivers.push_back(Waiter{g.id, 0, s.target, -1, s.loc});
                return Sig::Block;
            }
            case StmtKind::Close: {
                Channel& ch = chan_of(g, s.res);
                if (ch.closed) fault(FaultKind::CloseOfClosed, s.loc, g.id);
                int ev = emit(g.id, EventKind::ChClose, {{ResKind::Chan, ch.id}}, {}, {}, s.loc,
                              g.fn->name);
                ch.closed = true;
                if (!ch.senders.empty()) {
                    const Waiter& w = ch.senders.front();
                    fault(FaultKind::SendOnClosed, w.loc, w.g);
                }
                while (!ch.receivers.empty()) {
                    Waiter w = ch.receivers.front();
                    ch.receivers.pop_front();
                    wake_receiver(ch, w, 0, ev);
                }
                return Sig::Cont;
            }
            case StmtKind::Lock: {
                Mutex& m = mutex_of(g, s.res);
                emit(g.id, EventKind::MuLockPre, {{ResKind::Mutex, m.id}}, {}, {}, s.loc,
                     g.fn->name);
                return acquire_or_wait(g, m, s.loc) ? Sig::Cont : Sig::Block;
            }
            case StmtKind::Unlock: {
                do_unlock(g, mutex_of(g, s.res), s.loc);
                return Sig::Cont;
            }
            case StmtKind::WgAdd:
            case StmtKind::WgDone: {
                WaitGroup& w = wg_of(g, s.res);
                std::int64_t delta = s.kind == StmtKind::WgDone ? -1 : eval(g, *s.expr);
                w.counter += delta;
                int ev = emit(g.id, EventKind::WgAdd, {{ResKind::Wg, w.id}}, delta, {}, s.loc,
                              g.fn->name);
                if (w.counter < 0) fault(FaultKind::NegativeWgCounter, s.loc, g.id);
                if (w.counter == 0) {
                    while (!w.waiters.empty()) {
                        Waiter wt = w.waiters.front();
                        w.waiters.pop_front();
                        Goroutine& wg_g = gors_.at(wt.g);
                        emit(wg_g.id, EventKind::GoUnblock, {{ResKind::Wg, w.id}}, {}, ev, wt.loc,
                             wg_g.fn->name);
                        emit(wg_g.id, EventKind::WgWaitPost, {{ResKind::Wg, w.id}}, {}, {}, wt.loc,
                             wg_g.fn->name);
                        make_runnable(wg_g);
                    }
                }
                return Sig::Cont;
            }
            case StmtKind::WgWait: {
                WaitGroup& w = wg_of(g, s.res);
                emit(g.id, EventKind::WgWaitPre, {{ResKind::Wg, w.id}}, {}, {}, s.loc, g.fn->name);
                if (w.counter == 0) {
                    emit(g.id, EventKind::WgWaitPost, {{ResKind::Wg, w.id}}, {}, {}, s.loc,
                         g.fn->name);
                    return Sig::Cont;
                }
                block(g, BlockReason::WgWait, {{ResKind::Wg, w.id}}, s.loc);
                w.waiters.push_back(Waiter{g.id, 0, "", -1, s.loc});
                return Sig::Block;
            }
            case StmtKind::CvWait: {
                CondVar& cv = cond_of(g, s.res);
                Mutex& m = mutexes_.at(cv.mutex_id);
                if (m.owner != g.id) fault(FaultKind::CvWaitWithoutLock, s.loc, g.id);
                do_unlock(g, m, s.loc);
                emit(g.id, EventKind::CvWaitPre, {{ResKind::Cond, cv.id}}, {}, {}, s.loc,
                     g.fn->name);
                block(g, BlockReason::CvWait, {{ResKind::Cond, cv.id}}, s.loc);
                cv.waiters.push_back(Waiter{g.id, 0, "", -1, s.loc});
                return Sig::Block;
            }
            case StmtKind::CvSignal:
            case StmtKind::CvBroadcast: {
                CondVar& cv = cond_of(g, s.res);
                EventKind k = s.kind == StmtKind::CvSignal ? EventKind::CvSignal
                                                          : EventKind::CvBroadcast;
                int ev = emit(g.id, k, {{ResKind::Cond, cv.id}}, {}, {}, s.loc, g.fn->name);
                size_t n = s.kind == StmtKind::CvSignal ? 1 : cv.waiters.size();
                for (size_t i = 0; i < n && !cv.waiters.empty(); i++) {
                    Waiter w = cv.waiters.front();
                    cv.waiters.pop_front();
                    Goroutine& wk = gors_.at(w.g);
                    emit(wk.id, EventKind::GoUnblock, {{ResKind::Cond, cv.id}}, {}, ev, w.loc,
                         wk.fn->name);
                    emit(wk.id, EventKind::CvWaitPost, {{ResKind::Cond, cv.id}}, {}, {}, w.loc,
                         wk.fn->name);
                    // reacquire the associated mutex before continuing
                    Mutex& m = mutexes_.at(cv.mutex_id);
                    emit(wk.id, EventKind::MuLockPre, {{ResKind::Mutex, m.id}}, {}, {}, w.loc,
                         wk.fn->name);
                    wk.status = GoStatus::Runnable;  // tentative; may re-block below
                    if (m.owner == 0) {
                        m.owner = wk.id;
                        emit(wk.id, EventKind::MuLockPost, {{ResKind::Mutex, m.id}}, {}, {}, w.loc,
                             wk.fn->name);
                        make_runnable(wk);
                    } else {
                        block(wk, BlockReason::Lock, {{ResKind::Mutex, m.id}}, w.loc);
                        m.waiters.push_back(Waiter{wk.id, 0, "", -1, w.loc});
                    }
                }
                return Sig::Cont;
            }
            case StmtKind::Select:
                return exec_select(g, s);
            case StmtKind::If: {
                const auto& body = eval(g, *s.expr) != 0 ? s.body : s.else_body;
                if (!body.empty())
                    g.frames.push_back(Frame{&body, 0, FrameKind::Plain, nullptr, "", 0, 0});
                return Sig::Cont;
            }
            case StmtKind::ForRange: {
                std::int64_t b = eval(g, *s.expr), e = eval(g, *s.expr2);
                if (b < e) {
                    Value v;
                    v.i = b;
                    g.locals[s.aux_name] = v;
                    g.frames.push_back(Frame{&s.body, 0, FrameKind::For, &s, s.aux_name, b, e});
                }
                return Sig::Cont;
            }
            case StmtKind::Loop:
                g.frames.push_back(Frame{&s.body, 0, FrameKind::Loop, &s, "", 0, 0});
                return Sig::Cont;
            case StmtKind::Yield:
                return Sig::Yield;
            case StmtKind::Return:
                g.frames.clear();
                g.pending.reset();
                return Sig::Cont;  // next peek sees the exhausted body
            case StmtKind::Skip:
                return Sig::Cont;
        }
        return Sig::Cont;
    }

    int spawn_child(const FuncDecl& fn, int parent, std::map<std::string, Value> locals,
                    const SourceLoc& loc) {
        int id = next_gid_++;
        Goroutine child;
        child.id = id;
        child.parent = parent;
        child.fn = &fn;
        child.locals = std::move(locals);
        child.frames.push_back(Frame{&fn.body, 0, FrameKind::Plain, nullptr, "", 0, 0});
        gors_[id] = std::move(child);
        Goroutine& p = gors_.at(parent);
        emit(parent, EventKind::GoCreate, {}, id, {}, loc, p.fn->name);
        fifo_.push_back(id);
        return id;
    }

    Sig exec_select(Goroutine& g, const Stmt& s) {
        // send-case values are evaluated at entry, as in Go
        std::vector<std::int64_t> send_vals(s.cases.size(), 0);
        std::vector<std::pair<std::string, std::string>> args;
        for (size_t i = 0; i < s.cases.size(); i++) {
            const SelectCase& c = s.cases[i];
            if (c.is_send) send_vals[i] = eval(g, *c.send_value);
            args.emplace_back("case" + std::to_string(i) + "_dir", c.is_send ? "SEND" : "RECV");
            args.emplace_back("case" + std::to_string(i) + "_res",
                              std::to_string(chan_of(g, c.chan).id));
        }
        args.emplace_back("default", s.has_default ? "1" : "0");
        emit(g.id, EventKind::SelectPre, {}, {}, {}, s.loc, g.fn->name, std::move(args));

        std::vector<size_t> ready;
        for (size_t i = 0; i < s.cases.size(); i++) {
            const Channel& ch = chan_of(g, s.cases[i].chan);
            if (s.cases[i].is_send ? send_ready(ch) : recv_ready(ch)) ready.push_back(i);
        }
        if (!ready.empty()) {
            size_t k = ready[rand_below(ready.size())];
            const SelectCase& c = s.cases[k];
            Channel& ch = chan_of(g, c.chan);
            emit(g.id, EventKind::SelectPost, {}, {}, static_cast<std::int64_t>(k), s.loc,
                 g.fn->name);
            if (c.is_send) {
                emit(g.id, EventKind::ChSendPre, {{ResKind::Chan, ch.id}}, {}, {}, c.loc,
                     g.fn->name);
                bool done = try_send(g, ch, send_vals[k], c.loc);
                assert(done);
                (void)done;
            } else {
                emit(g.id, EventKind::ChRecvPre, {{ResKind::Chan, ch.id}}, {}, {}, c.loc,
                     g.fn->name);
                auto v = try_recv(g, ch, c.loc);
                assert(v);
                store_recv(g, c.recv_target, *v);
            }
            if (!c.body.empty())
                g.frames.push_back(Frame{&c.body, 0, FrameKind::Plain, nullptr, "", 0, 0});
            return Sig::Cont;
        }
        if (s.has_default) {
            emit(g.id, EventKind::SelectPost, {}, {}, -1, s.loc, g.fn->name);
            if (!s.default_body.empty())
                g.frames.push_back(
                    Frame{&s.default_body, 0, FrameKind::Plain, nullptr, "", 0, 0});
            return Sig::Cont;
        }
        // park on every case channel
        block(g, BlockReason::Select, {}, s.loc);
        g.blocked_select = &s;
        for (size_t i = 0; i < s.cases.size(); i++) {
            const SelectCase& c = s.cases[i];
            Channel& ch = chan_of(g, c.chan);
            Waiter w{g.id, send_vals[i], c.recv_target, static_cast<int>(i), c.loc};
            if (c.is_send) ch.senders.push_back(w);
            else ch.receivers.push_back(w);
            g.wait_channels.push_back(ch.id);
        }
        return Sig::Block;
    }
};

}  // namespace

RunResult run(const Program& program, const SchedulerConfig& config,
              std::optional<std::int64_t> arg0) {
    if (!program.checked) throw std::invalid_argument("run: program has not been validated");
    Interp interp(program, config, arg0);
    return interp.run();
}

}  // namespace ectsim
