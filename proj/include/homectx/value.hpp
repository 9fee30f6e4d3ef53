#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace homectx {

/// Reference to a real-world entity ("User:nihongbo", "BathRoom_30").
struct EntityRef {
    std::string uri;

    friend bool operator==(const EntityRef&, const EntityRef&) = default;
    friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

struct Text {
    std::string text;
    friend bool operator==(const Text&, const Text&) = default;
};

struct Number {
    double value = 0.0;
    std::string unit;
    friend bool operator==(const Number&, const Number&) = default;
};

/// Minutes since midnight, 0..1439.
struct TimeOfDay {
    int minutes = 0;
    friend bool operator==(const TimeOfDay&, const TimeOfDay&) = default;
};

/// Closed range of expected values. Only meaningful as the expected side of
/// an interval-kind attribute ("12:00..13:30").
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool time_of_day = false;
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class ValueKind { Text, Number, Boolean, TimeOfDay, Entity, Interval };

std::string_view to_string(ValueKind kind);

class Value {
public:
    using Storage = std::variant<Text, Number, bool, TimeOfDay, EntityRef, Interval>;

    Value() : data_(Text{}) {}

    static Value text(std::string s);
    static Value number(double v, std::string unit = {});
    static Value boolean(bool b);
    static Value time_of_day(int minutes);
    static Value time_of_day(int hours, int minutes);
    static Value entity(std::string uri);
    static Value interval(double lo, double hi);
    static Value time_interval(int lo_minutes, int hi_minutes);

    /// Parses the lexical form produced by `to_lexical`. Quoted strings are
    /// Text, `true`/`false` Boolean, `H:MM` TimeOfDay, `a..b` Interval,
    /// numbers (with an optional space-separated unit) Number; any other bare
    /// token is an Entity.
    static Value parse(std::string_view lexical);

    ValueKind kind() const;
    const Storage& data() const { return data_; }

    bool is_text() const { return kind() == ValueKind::Text; }
    bool is_number() const { return kind() == ValueKind::Number; }
    bool is_boolean() const { return kind() == ValueKind::Boolean; }
    bool is_time() const { return kind() == ValueKind::TimeOfDay; }
    bool is_entity() const { return kind() == ValueKind::Entity; }
    bool is_interval() const { return kind() == ValueKind::Interval; }

    const std::string& as_text() const;
    double as_number() const;
    bool as_boolean() const;
    int as_minutes() const;
    const EntityRef& as_entity() const;
    const Interval& as_interval() const;

    /// Numeric view for Number and TimeOfDay; nullopt for everything else.
    std::optional<double> as_real() const;

    /// String view used for categorical equality: Text and Entity compare by
    /// their string, Boolean as "true"/"false", others by lexical form.
    std::string symbol() const;

    std::string to_lexical() const;

    friend bool operator==(const Value&, const Value&) = default;

private:
    explicit Value(Storage data) : data_(std::move(data)) {}
    Storage data_;
};

std::string format_time_of_day(int minutes);
std::optional<int> parse_time_of_day(std::string_view s);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

}  // namespace homectx
