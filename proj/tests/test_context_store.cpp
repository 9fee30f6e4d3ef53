#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <fstream>
#include <functional>
#include <sstream>

#include "homectx/context_store.hpp"
#include "homectx/error.hpp"
#include "support.hpp"

using namespace homectx;

namespace {

Triple triple(const std::string& s, const std::string& p, Value o, const std::string& provider, VirtualTime at) {
    return Triple{EntityRef{s}, p, std::move(o), provider, at};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("latest assertion wins for a functional predicate") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    store.provider_join({"p1", ProviderKind::HardwareSim});
    store.provider_join({"p2", ProviderKind::HardwareSim});
    CHECK(store.assert_triple(triple("NHB", "User_Locatedin", Value::entity("BathRoom_30"), "p1", 10)).kind ==
          DeltaKind::Inserted);
    const auto d = store.assert_triple(triple("NHB", "User_Locatedin", Value::entity("Bedroom_1"), "p2", 20));
    CHECK(d.kind == DeltaKind::Replaced);
    REQUIRE(d.previous);
    CHECK(d.previous->object.symbol() == "BathRoom_30");
    CHECK(store.lookup(EntityRef{"NHB"}, "User_Locatedin")->symbol() == "Bedroom_1");
    CHECK(store.assert_triple(triple("NHB", "User_Locatedin", Value::entity("Bedroom_1"), "p2", 30)).kind ==
          DeltaKind::NoOp);
    CHECK(store.size() == 1);
}

TEST_CASE("multi-valued HasDevice query returns every device") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    std::ifstream in(fixture("snapshots/bathing.csv"));
    store.load_csv(in);
    const auto hits = store.query_pattern({EntityRef{"BathRoom_30"}, std::string("HasDevice"), std::nullopt});
    std::set<std::string> devices;
    for (const auto& t : hits) devices.insert(t.object.symbol());
    CHECK(devices == std::set<std::string>{"Lamp-2", "Shower"});
    CHECK(store.query_pattern({std::nullopt, std::nullopt, Value::entity("Shower")}).size() == 1);
}

TEST_CASE("store errors") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    store.provider_join({"p", ProviderKind::SoftwareSim});
    CHECK(code_of([&] { store.provider_join({"p", ProviderKind::SoftwareSim}); }) == ErrorCode::DuplicateProvider);
    CHECK(code_of([&] { store.assert_triple(triple("a", "b", Value::number(1), "ghost", 0)); }) ==
          ErrorCode::UnknownProvider);
    CHECK(code_of([&] { store.assert_triple(triple("a", "bad pred", Value::number(1), "p", 0)); }) ==
          ErrorCode::InvalidValue);
    store.assert_triple(triple("a", "b", Value::number(1), "p", 50));
    CHECK(code_of([&] { store.assert_triple(triple("a", "c", Value::number(1), "p", 49)); }) ==
          ErrorCode::NonMonotoneStamp);
    CHECK(code_of([&] { store.query_pattern({}); }) == ErrorCode::InvalidPattern);
    CHECK(code_of([&] { store.provider_leave("ghost"); }) == ErrorCode::UnknownProvider);
}

TEST_CASE("store changes are announced on context topics") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    std::vector<std::string> kinds;
    auto h = bus.subscribe("context/*", [&](const Message& m) { kinds.push_back(m.kind); });
    store.provider_join({"p", ProviderKind::SoftwareSim});
    store.assert_triple(triple("a", "b", Value::number(1), "p", 0));
    store.assert_triple(triple("a", "b", Value::number(1), "p", 0));
    store.provider_leave("p");
    CHECK(kinds == std::vector<std::string>{"assert", "retract"});
}

TEST_CASE("provider_leave removes exactly that provider's triples") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        VirtualClock clock;
        MessageBus bus(clock);
        ContextStore store(bus);
        const int n_providers = 2 + static_cast<int>(rng() % 4);
        for (int p = 0; p < n_providers; ++p) store.provider_join({"p" + std::to_string(p), ProviderKind::HardwareSim});
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            const auto subj = "s" + std::to_string(rng() % 6);
            const auto pred = rng() % 3 == 0 ? std::string("HasDevice") : "q" + std::to_string(rng() % 3);
            store.assert_triple(triple(subj, pred, Value::entity("o" + std::to_string(rng() % 4)),
                                       "p" + std::to_string(rng() % n_providers), i));
        }
        const auto before = store.all();
        const auto leaving = "p" + std::to_string(rng() % n_providers);
        std::vector<Triple> expected;
        std::copy_if(before.begin(), before.end(), std::back_inserter(expected),
                     [&](const Triple& t) { return t.provider != leaving; });
        const auto removed = store.provider_leave(leaving);
        CHECK(removed == before.size() - expected.size());
        CHECK(store.all() == expected);
        CHECK_FALSE(store.is_live(leaving));
    }
}

TEST_CASE("snapshot marks absent attributes") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    std::ifstream in(fixture("snapshots/bathing.csv"));
    store.load_csv(in);
    std::vector<AttributeBinding> bindings{
        {"loc", EntityRef{"NHB"}, "User_Locatedin", std::nullopt},
        {"shower", EntityRef{"BathRoom_30"}, "HasDevice", Value::entity("Shower")},
        {"tv", EntityRef{"BathRoom_30"}, "HasDevice", Value::entity("TV")},
    };
    const auto snap = store.snapshot_attributes(bindings);
    CHECK(snap.present_count() == 2);
    CHECK(snap.find("loc")->value->symbol() == "BathRoom_30");
    CHECK_FALSE(snap.find("tv")->value);
    CHECK(attribute_key(bindings[1]) == "BathRoom_30|HasDevice|Shower");
}

TEST_CASE("csv dump round-trips") {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore a(bus), b(bus);
    const auto text = read_text(fixture("snapshots/bathing.csv"));
    std::istringstream in(text);
    a.load_csv(in);
    std::ostringstream out;
    a.dump_csv(out);
    std::istringstream back(out.str());
    b.load_csv(back);
    CHECK(a.all() == b.all());
    CHECK(a.size() == 7);

    std::istringstream bad("subj,prop,obj,provider,stamp\nx,y\n");
    try {
        read_triples_csv(bad);
        FAIL("expected ParseError");
    } catch (const SourceError& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(e.line() == 2);
    }
}
