#include "homectx/service_manager.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homectx/error.hpp"

namespace homectx {

using nlohmann::json;

std::string_view to_string(ServiceState s) {
    switch (s) {
        case ServiceState::Available: return "available";
        case ServiceState::Busy: return "busy";
        case ServiceState::Offline: return "offline";
    }
    return "?";
}

ServiceState parse_service_state(std::string_view s) {
    if (s == "available") return ServiceState::Available;
    if (s == "busy") return ServiceState::Busy;
    if (s == "offline") return ServiceState::Offline;
    throw Error(ErrorCode::InvalidConfig, "unknown service state '" + std::string(s) + "'");
}

bool ServiceDescriptor::supports(const std::string& method) const {
    return std::find(capabilities.begin(), capabilities.end(), method) != capabilities.end();
}

std::string service_topic(const std::string& service_id) { return "service/" + service_id; }

std::optional<Binding> ZoneFirstSelection::select(const std::string& type,
                                                  const std::vector<ServiceDescriptor>& candidates,
                                                  const std::optional<std::string>& user_zone) const {
    const ServiceDescriptor* best = nullptr;
    auto rank = [&](const ServiceDescriptor& d) {
        const int zone = user_zone && d.zone == *user_zone ? 0 : 1;
        const int state = d.state == ServiceState::Available ? 0 : 1;
        return std::pair{zone, state};
    };
    for (const auto& d : candidates) {
        if (d.state == ServiceState::Offline) continue;
        if (!best || rank(d) < rank(*best)) best = &d;
    }
    if (!best) return std::nullopt;
    std::string why;
    if (user_zone && best->zone == *user_zone)
        why = "same zone " + *user_zone;
    else
        why = user_zone ? "no provider in " + *user_zone : "no user location";
    why += ", " + std::string(to_string(best->state));
    return Binding{type, *best, why};
}

std::string ActuatorRecord::to_string() const {
    std::string s = format_stamp(stamp) + " #" + std::to_string(correlation) + " " + service_id + " " + type + ":" +
                    method + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ",";
        s += args[i].to_lexical();
    }
    s += ") ";
    s += status == ResponseStatus::Ok ? "ok" : "failed";
    return s;
}

namespace {

ServiceDescriptor descriptor_from(const json& j) {
    ServiceDescriptor d;
    d.id = j.at("id").get<std::string>();
    d.type = j.at("type").get<std::string>();
    d.entity = EntityRef{j.value("entity", d.id)};
    d.zone = j.value("zone", std::string{});
    d.capabilities = j.value("capabilities", std::vector<std::string>{});
    d.state = parse_service_state(j.value("state", std::string("available")));
    return d;
}

}  // namespace

ServiceSeed parse_service_seed(const std::string& json_text) {
    ServiceSeed seed;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("service seed: ") + e.what());
    }
    try {
        const json* services = &doc;
        if (doc.is_object()) {
            for (const auto& t : doc.value("types", json::array()))
                seed.types.push_back({t.at("name").get<std::string>(), t.value("methods", std::vector<std::string>{})});
            services = &doc.at("services");
        }
        if (!services->is_array()) throw Error(ErrorCode::ParseError, "service seed: expected an array of services");
        for (const auto& s : *services) seed.services.push_back(descriptor_from(s));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("service seed: ") + e.what());
    }
    return seed;
}

ServiceSeed load_service_seed(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_service_seed(ss.str());
}

ServiceManager::ServiceManager(MessageBus& bus) : ServiceManager(bus, Options{}) {}

ServiceManager::ServiceManager(MessageBus& bus, Options options)
    : bus_(bus), options_(std::move(options)), strategy_(std::make_unique<ZoneFirstSelection>()) {}

ServiceManager::~ServiceManager() {
    for (auto& [id, h] : responders_) h.cancel();
}

void ServiceManager::register_type(AbstractServiceType type) {
    std::lock_guard lock(mutex_);
    if (types_.count(type.name)) throw Error(ErrorCode::DuplicateId, "service type '" + type.name + "' already known");
    types_.emplace(type.name, std::move(type));
}

void ServiceManager::register_service(ServiceDescriptor d, Responder responder) {
    std::lock_guard lock(mutex_);
    if (d.id.empty()) throw Error(ErrorCode::InvalidConfig, "service id is empty");
    if (services_.count(d.id)) throw Error(ErrorCode::DuplicateId, "service '" + d.id + "' already registered");
    auto t = types_.find(d.type);
    if (t == types_.end()) {
        warnings_.push_back("service '" + d.id + "' introduces unknown type '" + d.type + "'");
        types_.emplace(d.type, AbstractServiceType{d.type, {}});
    } else {
        for (const auto& m : t->second.required_methods)
            if (!d.supports(m))
                throw Error(ErrorCode::InvalidConfig, "service '" + d.id + "' lacks method " + m + " of " + d.type);
    }
    if (responder) responders_.emplace(d.id, bus_.serve(service_topic(d.id), std::move(responder)));
    services_.emplace(d.id, std::move(d));
}

void ServiceManager::unregister(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (!services_.erase(id)) throw Error(ErrorCode::UnknownService, "no service '" + id + "'");
    if (auto it = responders_.find(id); it != responders_.end()) {
        it->second.cancel();
        responders_.erase(it);
    }
}

void ServiceManager::set_state(const std::string& id, ServiceState state) {
    std::lock_guard lock(mutex_);
    auto it = services_.find(id);
    if (it == services_.end()) throw Error(ErrorCode::UnknownService, "no service '" + id + "'");
    it->second.state = state;
}

void ServiceManager::seed(const ServiceSeed& seed) {
    for (const auto& t : seed.types) register_type(t);
    for (const auto& s : seed.services) register_service(s);
}

bool ServiceManager::discoverable(const std::string& type) const {
    std::lock_guard lock(mutex_);
    for (const auto& [id, d] : services_)
        if (d.type == type && d.state != ServiceState::Offline) return true;
    return false;
}

std::optional<ServiceDescriptor> ServiceManager::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = services_.find(id);
    if (it == services_.end()) return std::nullopt;
    return it->second;
}

std::vector<ServiceDescriptor> ServiceManager::list() const {
    std::lock_guard lock(mutex_);
    std::vector<ServiceDescriptor> out;
    for (const auto& [id, d] : services_) out.push_back(d);
    return out;
}

std::vector<AbstractServiceType> ServiceManager::types() const {
    std::lock_guard lock(mutex_);
    std::vector<AbstractServiceType> out;
    for (const auto& [name, t] : types_) out.push_back(t);
    return out;
}

std::vector<std::string> ServiceManager::warnings() const {
    std::lock_guard lock(mutex_);
    return warnings_;
}

Binding ServiceManager::discover_and_select(const std::string& type, const ContextSnapshot& ctx) const {
    std::optional<std::string> zone;
    if (auto loc = ctx.by_predicate(options_.location_predicate)) zone = options_.zones.zone_of(loc->symbol());
    return discover_and_select(type, zone);
}

Binding ServiceManager::discover_and_select(const std::string& type, const std::optional<std::string>& user_zone) const {
    std::vector<ServiceDescriptor> candidates;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, d] : services_)
            if (d.type == type) candidates.push_back(d);
    }
    auto b = strategy_->select(type, candidates, user_zone);
    if (!b) throw Error(ErrorCode::NoProvider, "no live provider of " + type);
    return *b;
}

Response ServiceManager::invoke(const Binding& b, const std::string& method, const std::vector<Value>& args,
                                const std::string& source) {
    if (!b.descriptor.supports(method))
        throw Error(ErrorCode::UnsupportedMethod, b.descriptor.id + " does not support " + method);
    {
        std::lock_guard lock(mutex_);
        if (!services_.count(b.descriptor.id))
            throw Error(ErrorCode::NoResponder, "service '" + b.descriptor.id + "' is no longer registered");
    }
    Response resp = bus_.request(service_topic(b.descriptor.id), Invocation{b.descriptor.id, method, args},
                                 options_.request_timeout, source);
    std::lock_guard lock(mutex_);
    log_.push_back(ActuatorRecord{bus_.clock().now(), resp.correlation, b.descriptor.id, b.type, method, args,
                                  resp.status});
    return resp;
}

std::vector<ActuatorRecord> ServiceManager::actuator_log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

void ServiceManager::set_strategy(std::unique_ptr<SelectionStrategy> strategy) {
    if (!strategy) throw Error(ErrorCode::InvalidArgument, "selection strategy is null");
    strategy_ = std::move(strategy);
}

}  // namespace homectx
