#include <doctest.h>

#include "ectsim/runtime.hpp"
#include "helpers.hpp"

using namespace ectsim;
using namespace ectsim::testing;

TEST_CASE("empty main produces the minimal trace") {
    RunResult r = run_text("func main() { }");
    CHECK(r.outcome.status == RunStatus::Completed);
    std::vector<EventKind> expect = {EventKind::RunBegin, EventKind::GoCreate,
                                     EventKind::GoStart, EventKind::GoEnd, EventKind::RunEnd};
    CHECK(kinds(r) == expect);
    CHECK(r.events[1].value == 1);  // GO_CREATE names the new goroutine
}

TEST_CASE("timestamps strictly increase with event id") {
    RunResult r = run_text(slurp(corpus_path("primesieve.csp")), {}, 4);
    for (size_t i = 1; i < r.events.size(); i++) {
        CHECK(r.events[i].ts > r.events[i - 1].ts);
        CHECK(r.events[i].id == static_cast<int>(i));
    }
}

TEST_CASE("recv with nobody sending is a global deadlock") {
    for (SchedPolicy p : {SchedPolicy::Fifo, SchedPolicy::Random, SchedPolicy::DelayInject}) {
        SchedulerConfig cfg;
        cfg.policy = p;
        cfg.seed = 3;
        RunResult r = run_text("func main() {\n  c = make(chan)\n  recv c\n}", cfg);
        CHECK(r.outcome.status == RunStatus::GlobalDeadlock);
    }
}

TEST_CASE("buffered sends below capacity do not block") {
    RunResult r = run_text(
        "func main() {\n"
        "  c = make(chan, 2)\n"
        "  send c 1\n"
        "  send c 2\n"
        "  x = recv c\n"
        "  y = recv c\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.final_status.at(1) == GoStatus::Done);
}

TEST_CASE("rendezvous transfers the value and orders post events") {
    RunResult r = run_text(
        "func child(c: chan) {\n  send c 42\n}\n"
        "func main() {\n  c = make(chan)\n  go child(c)\n  OUT = recv c\n}\n");
    REQUIRE(r.outcome.status == RunStatus::Completed);
    REQUIRE(r.outcome.outputs == std::vector<std::int64_t>{42});
    int send_post = -1, recv_post = -1;
    for (const Event& e : r.events) {
        if (e.kind == EventKind::ChSendPost) send_post = e.id;
        if (e.kind == EventKind::ChRecvPost) recv_post = e.id;
    }
    REQUIRE(send_post >= 0);
    REQUIRE(recv_post >= 0);
    CHECK(send_post < recv_post);
}

TEST_CASE("recv on a closed drained channel yields zero immediately") {
    RunResult r = run_text(
        "func main() {\n  c = make(chan, 1)\n  send c 9\n  close c\n  OUT = recv c\n  OUT = recv c\n}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{9, 0});
}

TEST_CASE("send on closed channel faults") {
    RunResult r = run_text("func main() {\n  c = make(chan, 1)\n  close c\n  send c 1\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::SendOnClosed);
    CHECK(r.events.back().kind == EventKind::RunEnd);
}

TEST_CASE("close of closed channel faults") {
    RunResult r = run_text("func main() {\n  c = make(chan)\n  close c\n  close c\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::CloseOfClosed);
}

TEST_CASE("closing a channel releases all blocked receivers with zero") {
    RunResult r = run_text(
        "func rx(c: chan, o: chan) {\n  x = recv c\n  send o x\n}\n"
        "func main() {\n"
        "  c = make(chan)\n"
        "  o = make(chan, 2)\n"
        "  go rx(c, o)\n"
        "  go rx(c, o)\n"
        "  yield\n"
        "  close c\n"
        "  OUT = recv o\n"
        "  OUT = recv o\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{0, 0});
}

TEST_CASE("unlock by non-owner faults") {
    RunResult r = run_text("func main() {\n  m = mutex()\n  unlock m\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::UnlockNotOwner);
}

TEST_CASE("negative waitgroup counter faults") {
    RunResult r = run_text("func main() {\n  w = wg()\n  done w\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::NegativeWgCounter);
}

TEST_CASE("condition wait without holding the mutex faults") {
    RunResult r = run_text("func main() {\n  m = mutex()\n  v = cond(m)\n  cwait v\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::CvWaitWithoutLock);
}

TEST_CASE("division by zero faults with the expression location") {
    RunResult r = run_text("func main() {\n  x = 0\n  y = 1 / x\n}");
    REQUIRE(r.outcome.status == RunStatus::Fault);
    CHECK(r.outcome.fault->kind == FaultKind::DivisionByZero);
    CHECK(r.outcome.fault->loc.line == 3);
}

TEST_CASE("waitgroup releases the waiter when the counter reaches zero") {
    RunResult r = run_text(
        "func worker(w: wg, o: chan) {\n  send o 5\n  done w\n}\n"
        "func main() {\n"
        "  w = wg()\n"
        "  o = make(chan, 1)\n"
        "  add w 1\n"
        "  go worker(w, o)\n"
        "  wait w\n"
        "  OUT = recv o\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{5});
}

TEST_CASE("condition signal wakes the waiter which reacquires the mutex") {
    RunResult r = run_text(
        "func waiter(m: mutex, v: cond, o: chan) {\n"
        "  lock m\n"
        "  cwait v\n"
        "  unlock m\n"
        "  send o 1\n"
        "}\n"
        "func main() {\n"
        "  m = mutex()\n"
        "  v = cond(m)\n"
        "  o = make(chan)\n"
        "  go waiter(m, v, o)\n"
        "  yield\n"
        "  lock m\n"
        "  signal v\n"
        "  unlock m\n"
        "  OUT = recv o\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{1});
}

TEST_CASE("broadcast wakes every waiter") {
    RunResult r = run_text(
        "func waiter(m: mutex, v: cond, o: chan) {\n  lock m\n  cwait v\n  unlock m\n  send o 1\n}\n"
        "func main() {\n"
        "  m = mutex()\n"
        "  v = cond(m)\n"
        "  o = make(chan, 3)\n"
        "  go waiter(m, v, o)\n"
        "  go waiter(m, v, o)\n"
        "  go waiter(m, v, o)\n"
        "  yield\n"
        "  yield\n"
        "  yield\n"
        "  lock m\n"
        "  broadcast v\n"
        "  unlock m\n"
        "  OUT = recv o\n"
        "  OUT = recv o\n"
        "  OUT = recv o\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>(3, 1));
}

TEST_CASE("select takes the default only when no case is ready") {
    RunResult r = run_text(
        "func main() {\n"
        "  c = make(chan)\n"
        "  o = make(chan, 1)\n"
        "  select {\n"
        "    case x = recv c { send o 1 }\n"
        "    default { send o 2 }\n"
        "  }\n"
        "  OUT = recv o\n"
        "}\n");
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{2});
    bool saw_post = false;
    for (const Event& e : r.events)
        if (e.kind == EventKind::SelectPost) {
            saw_post = true;
            CHECK(e.aux == -1);  // default branch
        }
    CHECK(saw_post);

    RunResult ready = run_text(
        "func main() {\n"
        "  c = make(chan, 1)\n"
        "  send c 7\n"
        "  select {\n"
        "    case OUT = recv c { skip }\n"
        "    default { skip }\n"
        "  }\n"
        "}\n");
    CHECK(ready.outcome.outputs == std::vector<std::int64_t>{7});
}

TEST_CASE("blocked select is woken by a sender") {
    RunResult r = run_text(
        "func tx(c: chan) {\n  send c 11\n}\n"
        "func main() {\n"
        "  c = make(chan)\n"
        "  d = make(chan)\n"
        "  go tx(c)\n"
        "  select {\n"
        "    case OUT = recv c { skip }\n"
        "    case OUT = recv d { skip }\n"
        "  }\n"
        "}\n");
    CHECK(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{11});
}

TEST_CASE("main exit kills survivors without further events") {
    RunResult r = run_text(
        "func stuck(c: chan) {\n  recv c\n}\n"
        "func main() {\n  c = make(chan)\n  go stuck(c)\n  yield\n}\n");
    REQUIRE(r.outcome.status == RunStatus::Completed);
    CHECK(r.outcome.final_status.at(2) == GoStatus::Killed);
    const Event* last = nullptr;
    for (const Event& e : r.events)
        if (e.g == 2) last = &e;
    REQUIRE(last != nullptr);
    CHECK(last->kind == EventKind::GoBlock);
    CHECK(r.events.back().kind == EventKind::RunEnd);
}

TEST_CASE("watchdog stops a spinning program") {
    SchedulerConfig cfg;
    cfg.max_steps = 500;
    RunResult r = run_text("func main() {\n  loop {\n    skip\n  }\n}", cfg);
    CHECK(r.outcome.status == RunStatus::WatchdogTimeout);
    CHECK(r.outcome.steps == 500);
}

TEST_CASE("arithmetic and control flow evaluate correctly") {
    RunResult r = run_text(
        "func main() {\n"
        "  s = 0\n"
        "  for i in 1 .. 6 {\n"
        "    if i % 2 == 0 {\n"
        "      s = s + i * 10\n"
        "    }\n"
        "    if i % 2 != 0 {\n"
        "      s = s + i\n"
        "    }\n"
        "  }\n"
        "  o = make(chan, 1)\n"
        "  send o s\n"
        "  OUT = recv o\n"
        "}\n");
    // odds 1+3+5 = 9, evens (2+4)*10 = 60
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{69});
}

TEST_CASE("fifo policy runs to block and yield rotates") {
    RunResult r = run_text(
        "func a(o: chan) {\n  send o 1\n  send o 2\n}\n"
        "func main() {\n"
        "  o = make(chan, 4)\n"
        "  go a(o)\n"
        "  yield\n"
        "  OUT = recv o\n"
        "  OUT = recv o\n"
        "}\n");
    // under run-to-block, a() finishes both sends before main resumes
    CHECK(r.outcome.outputs == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("identical configs give identical traces for every policy") {
    std::string text = slurp(corpus_path("moby28462.csp"));
    for (SchedPolicy p : {SchedPolicy::Fifo, SchedPolicy::Random, SchedPolicy::DelayInject}) {
        SchedulerConfig cfg;
        cfg.policy = p;
        cfg.seed = 7;
        RunResult a = run_text(text, cfg);
        RunResult b = run_text(text, cfg);
        CHECK(a.events == b.events);
        CHECK(a.stacks == b.stacks);
        CHECK(a.outcome.steps == b.outcome.steps);
    }
}

TEST_CASE("different seeds explore different random schedules") {
    std::string text = slurp(corpus_path("primesieve.csp"));
    SchedulerConfig a, b;
    a.policy = b.policy = SchedPolicy::Random;
    a.seed = 1;
    b.seed = 2;
    RunResult ra = run_text(text, a, 4);
    RunResult rb = run_text(text, b, 4);
    CHECK(ra.outcome.outputs == rb.outcome.outputs);  // result is schedule-independent
    CHECK(ra.events != rb.events);                    // but the interleaving is not
}

TEST_CASE("pre events carry no value and post events pair with them") {
    RunResult r = run_text(
        "func child(c: chan) {\n  send c 42\n}\n"
        "func main() {\n  c = make(chan)\n  go child(c)\n  OUT = recv c\n}\n");
    for (size_t i = 0; i < r.events.size(); i++) {
        const Event& e = r.events[i];
        if (is_pre_event(e.kind) && e.kind != EventKind::SelectPre) CHECK(!e.value.has_value());
    }
}

TEST_CASE("unvalidated programs are rejected by the runtime") {
    ParseResult res = parse("func main() { }", "t.csp");
    REQUIRE(res.ok());
    CHECK_THROWS_AS(run(res.program, SchedulerConfig{}), std::invalid_argument);
}
