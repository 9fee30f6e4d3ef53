#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "homectx/clock.hpp"
#include "homectx/value.hpp"

namespace homectx {

enum class ProviderKind { HardwareSim, SoftwareSim, UserProfile };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view s);

struct ProviderId {
    std::string id;
    ProviderKind kind = ProviderKind::HardwareSim;

    friend bool operator==(const ProviderId&, const ProviderId&) = default;
};

/// One context fact. `provider` names the live provider that supplied it.
struct Triple {
    EntityRef subject;
    std::string predicate;
    Value object;
    std::string provider;
    VirtualTime stamp = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

enum class EventKind { Internal, Context, Time, Service };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

struct Event {
    EventKind kind = EventKind::Internal;
    std::string name;
    std::map<std::string, Value> variables;
    VirtualTime stamp = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Request body sent to a concrete service.
struct Invocation {
    std::string service_id;
    std::string method;
    std::vector<Value> args;

    friend bool operator==(const Invocation&, const Invocation&) = default;
};

enum class ResponseStatus { Ok, Failed };

struct Response {
    std::uint64_t correlation = 0;
    ResponseStatus status = ResponseStatus::Ok;
    std::map<std::string, Value> state;
    std::string detail;

    friend bool operator==(const Response&, const Response&) = default;
};

using Payload = std::variant<std::monostate, Event, Triple, Invocation, Response>;

std::string describe(const Payload& payload);

/// Topic of the event channel an Event with this name travels on.
std::string event_topic(const std::string& event_name);

}  // namespace homectx
