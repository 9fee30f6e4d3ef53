#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "homectx/bus.hpp"
#include "homectx/context_store.hpp"
#include "homectx/zones.hpp"

namespace homectx {

struct AbstractServiceType {
    std::string name;
    std::vector<std::string> required_methods;

    friend bool operator==(const AbstractServiceType&, const AbstractServiceType&) = default;
};

enum class ServiceState { Available, Busy, Offline };

std::string_view to_string(ServiceState s);
ServiceState parse_service_state(std::string_view s);

struct ServiceDescriptor {
    std::string id;
    std::string type;
    EntityRef entity;
    std::string zone;
    std::vector<std::string> capabilities;
    ServiceState state = ServiceState::Available;

    bool supports(const std::string& method) const;
    friend bool operator==(const ServiceDescriptor&, const ServiceDescriptor&) = default;
};

struct Binding {
    std::string type;
    ServiceDescriptor descriptor;
    std::string rationale;
};

/// Bus topic a concrete service answers on.
std::string service_topic(const std::string& service_id);

/// Picks one descriptor among the live (non-offline) providers of a type.
/// `candidates` arrive sorted by id.
class SelectionStrategy {
public:
    virtual ~SelectionStrategy() = default;
    virtual std::optional<Binding> select(const std::string& type, const std::vector<ServiceDescriptor>& candidates,
                                          const std::optional<std::string>& user_zone) const = 0;
};

/// Same zone as the user first, then available before busy, then lowest id.
class ZoneFirstSelection : public SelectionStrategy {
public:
    std::optional<Binding> select(const std::string& type, const std::vector<ServiceDescriptor>& candidates,
                                  const std::optional<std::string>& user_zone) const override;
};

struct ActuatorRecord {
    VirtualTime stamp = 0;
    std::uint64_t correlation = 0;
    std::string service_id;
    std::string type;
    std::string method;
    std::vector<Value> args;
    ResponseStatus status = ResponseStatus::Ok;

    /// `stamp #corr service type:method(args) ok|failed`
    std::string to_string() const;
};

struct ServiceSeed {
    std::vector<AbstractServiceType> types;
    std::vector<ServiceDescriptor> services;
};

/// Accepts `{"types": [...], "services": [...]}` or a bare array of
/// service descriptors.
ServiceSeed parse_service_seed(const std::string& json_text);
ServiceSeed load_service_seed(const std::string& path);

class ServiceManager {
public:
    struct Options {
        ZoneMap zones;
        std::string location_predicate = "User_Locatedin";
        VirtualTime request_timeout = 1000;
    };

    explicit ServiceManager(MessageBus& bus);
    ServiceManager(MessageBus& bus, Options options);
    ~ServiceManager();

    ServiceManager(const ServiceManager&) = delete;
    ServiceManager& operator=(const ServiceManager&) = delete;

    void register_type(AbstractServiceType type);

    /// Unknown types are created on the fly with a warning. Throws DuplicateId
    /// or InvalidConfig (capabilities missing a required method). A given
    /// responder is served on the descriptor's topic until unregister.
    void register_service(ServiceDescriptor d, Responder responder = {});
    void unregister(const std::string& id);
    void set_state(const std::string& id, ServiceState state);

    void seed(const ServiceSeed& seed);

    bool discoverable(const std::string& type) const;
    std::optional<ServiceDescriptor> find(const std::string& id) const;
    std::vector<ServiceDescriptor> list() const;
    std::vector<AbstractServiceType> types() const;
    std::vector<std::string> warnings() const;

    Binding discover_and_select(const std::string& type, const ContextSnapshot& ctx) const;
    Binding discover_and_select(const std::string& type, const std::optional<std::string>& user_zone) const;

    /// Throws UnsupportedMethod before any bus traffic, NoResponder when the
    /// bound service is gone, Timeout when it does not answer.
    Response invoke(const Binding& b, const std::string& method, const std::vector<Value>& args,
                    const std::string& source = "services");

    std::vector<ActuatorRecord> actuator_log() const;

    void set_strategy(std::unique_ptr<SelectionStrategy> strategy);
    const Options& options() const { return options_; }

private:
    MessageBus& bus_;
    Options options_;
    std::unique_ptr<SelectionStrategy> strategy_;
    mutable std::mutex mutex_;
    std::map<std::string, AbstractServiceType> types_;
    std::map<std::string, ServiceDescriptor> services_;
    std::map<std::string, ResponderHandle> responders_;
    std::vector<ActuatorRecord> log_;
    std::vector<std::string> warnings_;
};

}  // namespace homectx
