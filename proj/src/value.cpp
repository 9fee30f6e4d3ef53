#include "homectx/value.hpp"

#include <charconv>
#include <cmath>

#include "homectx/error.hpp"

namespace homectx {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_real(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string unquote(std::string_view s) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) ++i;
        out += s[i];
    }
    return out;
}

}  // namespace

std::string_view to_string(ValueKind kind) {
    switch (kind) {
        case ValueKind::Text: return "text";
        case ValueKind::Number: return "number";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::TimeOfDay: return "time";
        case ValueKind::Entity: return "entity";
        case ValueKind::Interval: return "interval";
    }
    return "?";
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_time_of_day(int minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%d:%02d", minutes / 60, minutes % 60);
    return buf;
}

std::optional<int> parse_time_of_day(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2 || s.size() - colon != 3) return std::nullopt;
    int h = 0, m = 0;
    auto hs = s.substr(0, colon), ms = s.substr(colon + 1);
    for (char c : s.substr(0, colon)) if (c < '0' || c > '9') return std::nullopt;
    for (char c : ms) if (c < '0' || c > '9') return std::nullopt;
    std::from_chars(hs.data(), hs.data() + hs.size(), h);
    std::from_chars(ms.data(), ms.data() + ms.size(), m);
    if (h > 23 || m > 59) return std::nullopt;
    return h * 60 + m;
}

Value Value::text(std::string s) { return Value(Text{std::move(s)}); }

Value Value::number(double v, std::string unit) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "number must be finite");
    return Value(Number{v, std::move(unit)});
}

Value Value::boolean(bool b) { return Value(b); }

Value Value::time_of_day(int minutes) {
    if (minutes < 0 || minutes > 1439)
        throw Error(ErrorCode::InvalidValue, "time of day out of range: " + std::to_string(minutes));
    return Value(TimeOfDay{minutes});
}

Value Value::time_of_day(int hours, int minutes) { return time_of_day(hours * 60 + minutes); }

Value Value::entity(std::string uri) {
    if (uri.empty()) throw Error(ErrorCode::InvalidValue, "entity uri must be non-empty");
    return Value(EntityRef{std::move(uri)});
}

Value Value::interval(double lo, double hi) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw Error(ErrorCode::InvalidValue, "interval requires finite lo <= hi");
    return Value(Interval{lo, hi, false});
}

Value Value::time_interval(int lo_minutes, int hi_minutes) {
    if (lo_minutes < 0 || hi_minutes > 1439 || lo_minutes > hi_minutes)
        throw Error(ErrorCode::InvalidValue, "time interval requires 0 <= lo <= hi <= 1439");
    return Value(Interval{double(lo_minutes), double(hi_minutes), true});
}

Value Value::parse(std::string_view lexical) {
    auto s = trim(lexical);
    if (s.empty()) throw Error(ErrorCode::InvalidValue, "empty value");
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return text(unquote(s));
    if (s == "true") return boolean(true);
    if (s == "false") return boolean(false);
    if (auto t = parse_time_of_day(s)) return time_of_day(*t);
    if (auto dots = s.find(".."); dots != std::string_view::npos && dots > 0) {
        auto lo = s.substr(0, dots), hi = s.substr(dots + 2);
        auto tlo = parse_time_of_day(lo), thi = parse_time_of_day(hi);
        if (tlo && thi) return time_interval(*tlo, *thi);
        auto nlo = parse_real(lo), nhi = parse_real(hi);
        if (nlo && nhi) return interval(*nlo, *nhi);
    }
    if (auto v = parse_real(s)) return number(*v);
    if (auto sp = s.find(' '); sp != std::string_view::npos) {
        auto unit = trim(s.substr(sp + 1));
        if (auto v = parse_real(s.substr(0, sp)); v && unit.find(' ') == std::string_view::npos)
            return number(*v, std::string(unit));
        return text(std::string(s));
    }
    if (s.find('"') != std::string_view::npos) throw Error(ErrorCode::InvalidValue, "stray quote in value");
    return entity(std::string(s));
}

ValueKind Value::kind() const {
    switch (data_.index()) {
        case 0: return ValueKind::Text;
        case 1: return ValueKind::Number;
        case 2: return ValueKind::Boolean;
        case 3: return ValueKind::TimeOfDay;
        case 4: return ValueKind::Entity;
        default: return ValueKind::Interval;
    }
}

namespace {
[[noreturn]] void wrong_kind(ValueKind want, ValueKind got) {
    throw Error(ErrorCode::TypeError,
                "expected " + std::string(to_string(want)) + ", got " + std::string(to_string(got)));
}
}  // namespace

const std::string& Value::as_text() const {
    if (auto p = std::get_if<Text>(&data_)) return p->text;
    wrong_kind(ValueKind::Text, kind());
}

double Value::as_number() const {
    if (auto p = std::get_if<Number>(&data_)) return p->value;
    wrong_kind(ValueKind::Number, kind());
}

bool Value::as_boolean() const {
    if (auto p = std::get_if<bool>(&data_)) return *p;
    wrong_kind(ValueKind::Boolean, kind());
}

int Value::as_minutes() const {
    if (auto p = std::get_if<TimeOfDay>(&data_)) return p->minutes;
    wrong_kind(ValueKind::TimeOfDay, kind());
}

const EntityRef& Value::as_entity() const {
    if (auto p = std::get_if<EntityRef>(&data_)) return *p;
    wrong_kind(ValueKind::Entity, kind());
}

const Interval& Value::as_interval() const {
    if (auto p = std::get_if<Interval>(&data_)) return *p;
    wrong_kind(ValueKind::Interval, kind());
}

std::optional<double> Value::as_real() const {
    if (auto p = std::get_if<Number>(&data_)) return p->value;
    if (auto p = std::get_if<TimeOfDay>(&data_)) return double(p->minutes);
    return std::nullopt;
}

std::string Value::symbol() const {
    if (auto p = std::get_if<Text>(&data_)) return p->text;
    if (auto p = std::get_if<EntityRef>(&data_)) return p->uri;
    return to_lexical();
}

std::string Value::to_lexical() const {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Text>) {
                return quote(v.text);
            } else if constexpr (std::is_same_v<T, Number>) {
                return v.unit.empty() ? format_real(v.value) : format_real(v.value) + " " + v.unit;
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, TimeOfDay>) {
                return format_time_of_day(v.minutes);
            } else if constexpr (std::is_same_v<T, EntityRef>) {
                return v.uri;
            } else {
                if (v.time_of_day)
                    return format_time_of_day(int(v.lo)) + ".." + format_time_of_day(int(v.hi));
                return format_real(v.lo) + ".." + format_real(v.hi);
            }
        },
        data_);
}

}  // namespace homectx
