#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "homectx/error.hpp"
#include "homectx/reasoner.hpp"
#include "homectx/runtime.hpp"
#include "homectx/scoring.hpp"
#include "homectx/task_model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace homectx;

namespace {

ContextSnapshot snapshot_from(const std::string& rel) {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    std::ifstream in(fixture(rel));
    store.load_csv(in);
    return observe_store(store);
}

SimilarityConfig home_config() {
    return SimilarityConfig::from_library(load_definitions(fixture("tasks/home.json")));
}

}  // namespace

TEST_CASE("NoonBreak is retrieved and accepted") {
    auto base = load_case_base(fixture("cases/home.csv"));
    const auto result = retrieve_best(snapshot_from("snapshots/noonbreak.csv"), base, home_config());
    REQUIRE(result.best());
    CHECK(result.best()->solution == "NoonBreak");
    CHECK(result.best()->similarity == doctest::Approx(0.76).epsilon(0.005 / 0.76));
    CHECK(result.accepted);
    CHECK(base.find(result.best()->case_id)->usedtime == 1);
}

TEST_CASE("rank_cases leaves usedtime alone; rejection does too") {
    auto base = load_case_base(fixture("cases/home.csv"));
    const auto snap = snapshot_from("snapshots/noonbreak.csv");
    auto cfg = home_config();
    rank_cases(snap, base, cfg);
    cfg.theta = 0.9;
    const auto r = retrieve_best(snap, base, cfg);
    CHECK_FALSE(r.accepted);
    for (const Case* c : base.cases()) CHECK(c->usedtime == load_case_base(fixture("cases/home.csv")).find(c->case_id)->usedtime);
}

TEST_CASE("bathing snapshot self-matches case 142") {
    auto base = load_case_base(fixture("cases/bathing.csv"));
    const auto snap = snapshot_from("snapshots/bathing.csv");
    CHECK(snap.present_count() == 7);
    const auto r = retrieve_best(snap, base, home_config());
    REQUIRE(r.best());
    CHECK(r.best()->case_id == 142);
    CHECK(r.best()->solution == "Bathing");
    CHECK(r.best()->similarity == 1.0);
    CHECK(r.zone == std::optional<std::string>("BathRoom"));
}

TEST_CASE("represent_case mirrors the snapshot") {
    const auto c = represent_case(snapshot_from("snapshots/bathing.csv"), "Bathing", 142);
    CHECK(c.problem.size() == 7);
    CHECK(c.user.uri == "NHB");
    CHECK(c.usedtime == 0);
    std::vector<SnapshotEntry> one{{"x", {"x", EntityRef{"A"}, "B", std::nullopt}, Value::number(1)},
                                   {"y", {"y", EntityRef{"A"}, "C", std::nullopt}, std::nullopt}};
    CHECK(represent_case(ContextSnapshot(one), "T", 1).problem.size() == 1);
    try {
        represent_case(ContextSnapshot{}, "T", 1);
        FAIL("expected EmptySnapshot");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptySnapshot);
    }
}

TEST_CASE("case 142 persists to 8 rows and loads back equal") {
    const auto base = load_case_base(fixture("cases/bathing.csv"));
    std::ostringstream out;
    persist_case_base(base, out);
    CHECK(out.str() == read_text(fixture("cases/bathing.csv")));
    std::size_t rows = 0;
    for (char ch : out.str()) rows += ch == '\n';
    CHECK(rows == 9);  // header + 8
    CHECK(out.str().find("142,NHB,User_Task,Bathing,1") != std::string::npos);
    std::istringstream in(out.str());
    CHECK(load_case_base(in) == base);
}

TEST_CASE("empty base persists as a header") {
    std::ostringstream out;
    persist_case_base(CaseBase{}, out);
    CHECK(out.str() == "caseid,subj,prop,obj,usedtime\n");
    std::istringstream in(out.str());
    CHECK(load_case_base(in).size() == 0);
}

TEST_CASE("random bases re-save byte-identically") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = oracle::random_retrieval(rng, 20, 6);
        std::ostringstream first;
        persist_case_base(inst.base, first);
        std::istringstream in(first.str());
        const auto back = load_case_base(in);
        CHECK(back == inst.base);
        std::ostringstream second;
        persist_case_base(back, second);
        CHECK(second.str() == first.str());
    }
}

TEST_CASE("case csv errors carry the line") {
    std::istringstream in("caseid,subj,prop,obj,usedtime\n1,A,B,C,0\nx,A,B,C,0\n");
    try {
        load_case_base(in);
        FAIL("expected ParseError");
    } catch (const SourceError& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.line() == 3);
    }
}

TEST_CASE("empty base gives an empty, rejected result") {
    CaseBase base;
    const auto r = retrieve_best(snapshot_from("snapshots/noonbreak.csv"), base, home_config());
    CHECK(r.ranking.empty());
    CHECK_FALSE(r.accepted);
}

TEST_CASE("learned cases self-match") {
    CaseBase base;
    const auto snap = snapshot_from("snapshots/noonbreak.csv");
    const auto cfg = home_config();
    CHECK(learn_case(snap, "NoonBreak", base) == 1);
    const auto r = retrieve_best(snap, base, cfg);
    REQUIRE(r.best());
    CHECK(r.best()->similarity == 1.0);
    CHECK(r.accepted);
    try {
        learn_case(snap, "NoonBreak", base);
        FAIL("expected DuplicateExactCase");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateExactCase);
    }
    CHECK(learn_case(snap, "Rest", base) == 2);
}

TEST_CASE("learning into an unknown zone opens a partition with a warning") {
    CaseBase base;
    std::vector<SnapshotEntry> e{{"loc", {"loc", EntityRef{"U"}, "User_Locatedin", std::nullopt}, Value::entity("Garage_2")}};
    learn_case(ContextSnapshot(e), "Park", base);
    CHECK(base.partitions().count("Garage") == 1);
    CHECK(base.warnings().size() == 1);
    std::map<std::string, int> naive;
    for (const Case* c : base.cases()) ++naive[base.partition_key(*c)];
    CHECK(naive.size() == base.partitions().size());
}

TEST_CASE("retrieval agrees with the exhaustive scan") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = oracle::random_retrieval(rng);
        const auto expected = oracle::linear_scan(inst);
        const auto r = retrieve_best(inst.snapshot, inst.base, inst.cfg);
        INFO("trial " << trial);
        REQUIRE(expected.has_value() == (r.best() != nullptr));
        if (!expected) continue;
        CHECK(r.best()->case_id == expected->case_id);
        CHECK(r.best()->similarity == doctest::Approx(expected->similarity).epsilon(1e-12));
        CHECK(r.accepted == (expected->similarity >= inst.cfg.theta));
    }
}

TEST_CASE("serial and parallel scoring are identical") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = oracle::random_retrieval(rng, 50, 10);
        ObservationIndex obs(observation_vector(inst.snapshot));
        const auto cases = inst.base.cases();
        CHECK(score_cases_serial(cases, obs, inst.cfg) == score_cases_parallel(cases, obs, inst.cfg));
    }
    CHECK(scoring_threads() >= 1);
}
