#include <doctest.h>

#include <vector>

#include "homectx/clock.hpp"
#include "homectx/error.hpp"
#include "homectx/value.hpp"

using namespace homectx;

TEST_CASE("value lexical forms parse back to the same value") {
    for (const char* s : {"BathRoom_30", "8:40", "12:00..13:30", "30", "-4.5", "20 cells", "true", "\"a b\"", "1..2"}) {
        const auto v = Value::parse(s);
        CHECK(Value::parse(v.to_lexical()) == v);
    }
    CHECK(Value::parse("8:40").as_minutes() == 520);
    CHECK(Value::parse("Lamp-2").is_entity());
    CHECK(Value::parse("20 cells").as_number() == 20.0);
    CHECK(Value::parse("12:00..13:30").as_interval().time_of_day);
    CHECK_THROWS_AS(Value::parse("  "), Error);
}

TEST_CASE("format_real is shortest round-trip") {
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(30) == "30");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("stamps") {
    CHECK(format_stamp(0) == "00:00:00.000");
    CHECK(format_stamp(7 * 3'600'000 + 1'250) == "07:00:01.250");
    CHECK(parse_stamp("07:00") == 7 * 3'600'000);
    CHECK(parse_stamp("07:00:30") == 7 * 3'600'000 + 30'000);
    CHECK(parse_stamp("07:00:30.250") == 7 * 3'600'000 + 30'250);
    CHECK(parse_stamp("1500") == 1500);
    CHECK_FALSE(parse_stamp("seven"));
}

TEST_CASE("virtual clock fires timers in deadline then scheduling order") {
    VirtualClock clock(100);
    std::vector<int> fired;
    clock.schedule_at(300, [&] { fired.push_back(3); });
    clock.schedule_at(200, [&] { fired.push_back(1); });
    clock.schedule_at(200, [&] { fired.push_back(2); });
    const auto late = clock.schedule_at(400, [&] { fired.push_back(4); });
    CHECK(clock.cancel(late));
    clock.advance_to(350);
    CHECK(fired == std::vector<int>{1, 2, 3});
    CHECK(clock.now() == 350);
    clock.advance_to(10);  // never backwards
    CHECK(clock.now() == 350);
    CHECK(clock.pending() == 0);
}

TEST_CASE("run_until stops at the deadline") {
    VirtualClock clock;
    bool done = false;
    clock.schedule_at(50, [&] { done = true; });
    CHECK_FALSE(clock.run_until([&] { return done; }, 40));
    CHECK(clock.now() == 0);
    CHECK(clock.run_until([&] { return done; }, 100));
    CHECK(clock.now() == 50);
}
