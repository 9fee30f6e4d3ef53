#include "homectx/messages.hpp"

#include "homectx/error.hpp"

namespace homectx {

std::string_view to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::HardwareSim: return "hardware-sim";
        case ProviderKind::SoftwareSim: return "software-sim";
        case ProviderKind::UserProfile: return "user-profile";
    }
    return "?";
}

ProviderKind parse_provider_kind(std::string_view s) {
    if (s == "hardware-sim") return ProviderKind::HardwareSim;
    if (s == "software-sim") return ProviderKind::SoftwareSim;
    if (s == "user-profile") return ProviderKind::UserProfile;
    throw Error(ErrorCode::InvalidArgument, "unknown provider kind '" + std::string(s) + "'");
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Internal: return "internal";
        case EventKind::Context: return "context";
        case EventKind::Time: return "time";
        case EventKind::Service: return "service";
    }
    return "?";
}

EventKind parse_event_kind(std::string_view s) {
    if (s == "internal") return EventKind::Internal;
    if (s == "context") return EventKind::Context;
    if (s == "time") return EventKind::Time;
    if (s == "service") return EventKind::Service;
    throw Error(ErrorCode::InvalidArgument, "unknown event kind '" + std::string(s) + "'");
}

namespace {

std::string describe_vars(const std::map<std::string, Value>& vars) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : vars) {
        if (!first) out += ",";
        first = false;
        out += k + "=" + v.to_lexical();
    }
    return out + "}";
}

}  // namespace

std::string describe(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "-";
            } else if constexpr (std::is_same_v<T, Event>) {
                return "event " + std::string(to_string(p.kind)) + " " + p.name + " " + describe_vars(p.variables);
            } else if constexpr (std::is_same_v<T, Triple>) {
                return "triple " + p.subject.uri + " " + p.predicate + " " + p.object.to_lexical() + " " + p.provider +
                       " " + std::to_string(p.stamp);
            } else if constexpr (std::is_same_v<T, Invocation>) {
                std::string out = "invoke " + p.service_id + " " + p.method + "(";
                for (std::size_t i = 0; i < p.args.size(); ++i) out += (i ? "," : "") + p.args[i].to_lexical();
                return out + ")";
            } else {
                return "response " + std::to_string(p.correlation) + " " +
                       (p.status == ResponseStatus::Ok ? "ok" : "failed") + " " + describe_vars(p.state) + " " +
                       p.detail;
            }
        },
        payload);
}

std::string event_topic(const std::string& event_name) { return "event/" + event_name; }

}  // namespace homectx
