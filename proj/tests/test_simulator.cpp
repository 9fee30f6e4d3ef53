#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homectx/bench.hpp"
#include "homectx/error.hpp"
#include "homectx/simulator.hpp"
#include "support.hpp"

using namespace homectx;

namespace {

std::vector<std::string> scenario_files() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(fixture("scenarios")))
        if (e.path().extension() == ".scn") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("every fixture scenario passes its own assertions") {
    const auto files = scenario_files();
    CHECK(files.size() >= 6);
    for (const auto& f : files) {
        INFO(f);
        const auto report = run_scenario(f);
        if (const auto* bad = report.first_failure()) INFO(bad->description << ": " << bad->detail);
        CHECK(report.exit_code == 0);
    }
}

TEST_CASE("same seed, same trace") {
    for (const auto& f : scenario_files()) {
        INFO(f);
        std::ostringstream a, b;
        RunOptions oa, ob;
        oa.trace_out = &a;
        ob.trace_out = &b;
        const auto ra = run_scenario(f, oa);
        const auto rb = run_scenario(f, ob);
        CHECK(ra.trace == rb.trace);
        CHECK(ra.actuator_log == rb.actuator_log);
        CHECK(a.str() == b.str());
        CHECK_FALSE(a.str().empty());
    }
}

TEST_CASE("fire alarm snapshot mid-scenario") {
    auto scn = load_scenario(fixture("scenarios/firealarm.scn"));
    scn.end = parse_stamp("06:59:45");
    scn.assertions = nlohmann::json::array();
    std::vector<TaskInstance> live;
    std::optional<eca::StepPosition> up_position;
    run_scenario(scn, {}, [&](Middleware& mw) {
        live = mw.scheduler().snapshot();
        if (const auto* run = mw.procedure(1)) up_position = run->position();
    });
    REQUIRE(live.size() == 2);
    CHECK(live[0].name == "FireAlarm");
    CHECK(live[0].state == InstanceState::Running);
    CHECK(live[0].priority == 9);
    CHECK(live[1].name == "GettingUp");
    CHECK(live[1].state == InstanceState::Suspended);
    CHECK(live[1].priority == 3);
    REQUIRE(up_position);
    CHECK(up_position->set == 1);
    CHECK(up_position->rule == 0);
}

TEST_CASE("provider leave shrinks the next inference") {
    VirtualClock clock(parse_stamp("12:15").value());
    RuntimeConfig cfg;
    const auto lib = load_definitions(fixture("tasks/home.json"));
    cfg.similarity = SimilarityConfig::from_library(lib);
    Middleware mw(clock, lib, load_case_base(fixture("cases/home.csv")), cfg);
    mw.services().seed(load_service_seed(fixture("services/home.json")));
    for (const char* p : {"mattress", "system-clock", "door-angle"}) mw.store().provider_join({p, ProviderKind::HardwareSim});
    std::ifstream in(fixture("snapshots/noonbreak.csv"));
    for (auto t : read_triples_csv(in)) {
        t.stamp = clock.now();
        mw.store().assert_triple(t);
    }
    const auto before = mw.infer();
    REQUIRE(before.result.best());
    CHECK(before.result.best()->similarity == doctest::Approx(0.759).epsilon(0.005));

    CHECK(mw.store().provider_leave("door-angle") == 1);
    CHECK(mw.store().query_pattern({EntityRef{"Door_Bedroom"}, std::nullopt, std::nullopt}).empty());
    for (const auto& t : mw.store().all()) CHECK(t.provider != "door-angle");
    CHECK_FALSE(mw.observe().find_key("Door_Bedroom|Angle"));

    const auto after = mw.infer();
    REQUIRE(after.result.best());
    CHECK(after.result.best()->solution == "NoonBreak");
    CHECK(after.result.best()->similarity == doctest::Approx((0.466 * 20.0 / 30.0 + 0.277) / (0.466 + 0.277)));
}

TEST_CASE("scenario format errors") {
    try {
        parse_scenario(R"({"name": "x", "tasks": "t", "cases": "c", "services": "s",
            "timeline": [{"at": 20, "kind": "note"}, {"at": 10, "kind": "note"}]})");
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    try {
        parse_scenario(R"({"name": "x", "tasks": "t", "cases": "c", "services": "s",
            "timeline": [{"at": 20, "kind": "teleport"}]})");
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    CHECK_THROWS_AS(parse_scenario("{"), Error);
}

TEST_CASE("small bench grid") {
    BenchSpec spec;
    spec.cases = {1, 4};
    spec.attrs = {3, 5};
    spec.repetitions = 3;
    spec.min_sample_ms = 0.05;
    const auto rows = bench_reasoner(spec);
    REQUIRE(rows.size() == 4);
    CHECK(rows.front().cases == 1);
    for (const auto& r : rows) CHECK(r.mean_ms > 0.0);
    std::ostringstream out;
    write_bench_csv(out, rows);
    CHECK(out.str().rfind("cases,attrs,mean_ms,stdev_ms\n", 0) == 0);
    spec.repetitions = 1;
    CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("fit helpers") {
    const auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {1, 4, 9, 16}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
}
