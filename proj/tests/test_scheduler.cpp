#include <doctest.h>

#include <random>
#include <set>

#include "homectx/error.hpp"
#include "homectx/scheduler.hpp"
#include "homectx/trace.hpp"
#include "support.hpp"

using namespace homectx;

namespace {

Task task(const std::string& id, const std::string& name, int pr) {
    Task t;
    t.id = TaskId(id);
    t.name = name;
    t.priority = pr;
    return t;
}

TaskLibrary toy_library() {
    return TaskLibrary::build({task("1", "Home", 0), task("1.1", "GettingUp", 3), task("1.2", "FireAlarm", 9),
                               task("1.3", "Reading", 3), task("1.4", "Cleaning", 5), task("1.5", "Nap", 2)},
                              {});
}

}  // namespace

TEST_CASE("idle submission runs at once") {
    const auto lib = toy_library();
    VirtualClock clock;
    Scheduler s(lib, clock);
    const auto id = s.submit(TaskId("1.1"));
    CHECK(s.instance(id)->state == InstanceState::Running);
    CHECK(s.complete(id) == std::nullopt);
    CHECK(s.snapshot().empty());
    CHECK(s.running().empty());
}

TEST_CASE("fire alarm preempts getting up, which resumes afterwards") {
    const auto lib = toy_library();
    VirtualClock clock;
    TraceLog trace;
    Scheduler s(lib, clock, &trace);
    const auto up = s.submit(TaskId("1.1"));
    const auto fire = s.submit(TaskId("1.2"));
    CHECK(s.instance(up)->state == InstanceState::Suspended);
    CHECK(s.instance(fire)->state == InstanceState::Running);

    const auto snap = s.snapshot();
    REQUIRE(snap.size() == 2);
    CHECK(snap[0].name == "FireAlarm");
    CHECK(snap[0].state == InstanceState::Running);
    CHECK(snap[0].priority == 9);
    CHECK(snap[1].name == "GettingUp");
    CHECK(snap[1].state == InstanceState::Suspended);
    CHECK(snap[1].priority == 3);
    CHECK(s.snapshot() == snap);

    CHECK(s.complete(fire) == up);
    CHECK(s.instance(up)->state == InstanceState::Running);
    CHECK(trace.contains("#1:GettingUp running→suspended"));
    CHECK(trace.contains("#1:GettingUp suspended→running"));
    CHECK(trace.contains("#2:FireAlarm submitted Pr=9"));
}

TEST_CASE("equal priority never preempts") {
    const auto lib = toy_library();
    VirtualClock clock;
    Scheduler s(lib, clock);
    const auto a = s.submit(TaskId("1.1"));
    const auto b = s.submit(TaskId("1.3"));
    CHECK(s.instance(a)->state == InstanceState::Running);
    CHECK(s.instance(b)->state == InstanceState::Pending);
}

TEST_CASE("the more urgent waiting task starts first") {
    const auto lib = toy_library();
    VirtualClock clock;
    Scheduler s(lib, clock);
    const auto first = s.submit(TaskId("1.4"));
    const auto low = s.submit(TaskId("1.5"));
    const auto mid = s.submit(TaskId("1.1"));
    CHECK(s.instance(low)->state == InstanceState::Pending);
    CHECK(s.complete(first) == mid);
    CHECK(s.complete(mid) == low);
}

TEST_CASE("errors") {
    const auto lib = toy_library();
    VirtualClock clock;
    Scheduler s(lib, clock);
    CHECK_THROWS_AS(s.submit(TaskId("7.7")), Error);
    const auto a = s.submit(TaskId("1.1"));
    const auto b = s.submit(TaskId("1.3"));
    try {
        s.complete(b);
        FAIL("expected NotRunning");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotRunning);
    }
    s.abort(b);
    CHECK(s.instance(b)->state == InstanceState::Aborted);
    s.abort(a);
    CHECK(s.live() == 0);
}

TEST_CASE("parallel slots") {
    const auto lib = toy_library();
    VirtualClock clock;
    Scheduler s(lib, clock, nullptr, 2);
    s.submit(TaskId("1.5"));
    s.submit(TaskId("1.1"));
    CHECK(s.running().size() == 2);
    const auto fire = s.submit(TaskId("1.2"));
    CHECK(s.instance(fire)->state == InstanceState::Running);
    CHECK(s.instance(1)->state == InstanceState::Suspended);  // Nap is least urgent
}

TEST_CASE("random operation sequences keep the bookkeeping invariants") {
    const auto lib = toy_library();
    const std::vector<std::string> ids{"1.1", "1.2", "1.3", "1.4", "1.5"};
    const std::set<std::pair<InstanceState, InstanceState>> allowed{
        {InstanceState::Pending, InstanceState::Running},   {InstanceState::Running, InstanceState::Suspended},
        {InstanceState::Running, InstanceState::Completed}, {InstanceState::Running, InstanceState::Aborted},
        {InstanceState::Suspended, InstanceState::Running}, {InstanceState::Suspended, InstanceState::Aborted},
        {InstanceState::Pending, InstanceState::Aborted}};
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        VirtualClock clock;
        const int parallel = 1 + static_cast<int>(rng() % 2);
        Scheduler s(lib, clock, nullptr, parallel);
        bool legal = true;
        s.set_listener([&](const TaskInstance&, InstanceState from, InstanceState to) {
            legal = legal && allowed.count({from, to});
        });
        for (int step = 0; step < 40; ++step) {
            const auto op = rng() % 3;
            const auto live = s.snapshot();
            if (op == 0 || live.empty()) {
                s.submit(TaskId(ids[rng() % ids.size()]));
            } else if (op == 1 && !s.running().empty()) {
                const auto run = s.running();
                s.complete(run[rng() % run.size()]);
            } else {
                s.abort(live[rng() % live.size()].id);
            }
            CHECK(s.submitted() == s.completed() + s.aborted() + s.live());
            CHECK(static_cast<int>(s.running().size()) <= parallel);
            // Nothing waits while a slot is free.
            if (static_cast<int>(s.running().size()) < parallel) CHECK(s.live() == s.running().size());
        }
        CHECK(legal);
    }
}
