#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homectx/bus.hpp"
#include "homectx/case_base.hpp"
#include "homectx/clock.hpp"
#include "homectx/context_store.hpp"
#include "homectx/eca_engine.hpp"
#include "homectx/reasoner.hpp"
#include "homectx/scheduler.hpp"
#include "homectx/service_manager.hpp"
#include "homectx/task_model.hpp"
#include "homectx/trace.hpp"

namespace homectx {

struct RuntimeConfig {
    SimilarityConfig similarity;
    ZoneMap zones;
    int parallel = 1;
    VirtualTime step_budget = 0;
    VirtualTime request_timeout = 1000;
    /// When set, inference first asserts (clock_subject, Time, now).
    std::optional<std::string> clock_subject;
    std::string time_predicate = "Time";
};

struct InferenceRecord {
    VirtualTime stamp = 0;
    MatchResult result;
    std::optional<TaskId> submitted;
};

/// Every triple in the store as a snapshot entry keyed like case attributes.
ContextSnapshot observe_store(const ContextStore& store);

/// Whole middleware: store, reasoner, scheduler, rule engine and service
/// manager wired over one bus and one virtual clock.
///
/// Store changes are republished as Context events named
/// `subject.predicate`. Inference is edge-triggered: a task is submitted
/// when the accepted solution differs from the previously accepted one and
/// no instance of it is live. A running instance executes its contract's
/// procedure; suspension and resumption of the instance freeze and thaw
/// that procedure.
class Middleware {
public:
    Middleware(VirtualClock& clock, TaskLibrary library, CaseBase cases, RuntimeConfig config);
    ~Middleware();

    Middleware(const Middleware&) = delete;
    Middleware& operator=(const Middleware&) = delete;

    VirtualClock& clock() { return clock_; }
    MessageBus& bus() { return bus_; }
    TraceLog& trace() { return trace_; }
    ContextStore& store() { return store_; }
    ServiceManager& services() { return services_; }
    Scheduler& scheduler() { return scheduler_; }
    eca::RuleEngine& rules() { return rules_; }
    CaseBase& cases() { return cases_; }
    const TaskLibrary& library() const { return library_; }
    const RuntimeConfig& config() const { return config_; }

    /// Present facts of the store as a snapshot keyed like case attributes.
    ContextSnapshot observe() const;

    /// Retrieves the best case for the current store and submits its task
    /// when the edge rule allows it.
    InferenceRecord infer();

    /// True when a store change arrived since the last inference.
    bool context_dirty() const { return dirty_; }

    /// Stores the current observation as a case solved by `solution`.
    int learn(const std::string& solution);

    /// Task id named by a case solution (id or task name).
    std::optional<TaskId> resolve_solution(const std::string& solution) const;

    std::optional<std::string> user_zone() const;

    const std::vector<InferenceRecord>& inferences() const { return inferences_; }
    const eca::ProcedureRun* procedure(std::uint64_t instance) const;

    /// Dispatches one action through service selection and invocation.
    void dispatch(const eca::ActionSpec& action, const Event& cause);

private:
    void on_context(const Message& m);
    void on_transition(const TaskInstance& inst, InstanceState from, InstanceState to);
    void start_procedure(const TaskInstance& inst);

    VirtualClock& clock_;
    TaskLibrary library_;
    CaseBase cases_;
    RuntimeConfig config_;

    MessageBus bus_;
    TraceLog trace_;
    ContextStore store_;
    ServiceManager services_;
    Scheduler scheduler_;
    eca::RuleEngine rules_;

    SubscriptionHandle context_sub_;
    std::map<std::uint64_t, std::unique_ptr<eca::ProcedureRun>> runs_;
    std::vector<InferenceRecord> inferences_;
    std::optional<std::string> last_accepted_;
    bool dirty_ = false;
    bool clock_provider_joined_ = false;
};

}  // namespace homectx
