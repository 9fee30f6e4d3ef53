#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homectx/bus.hpp"
#include "homectx/error.hpp"
#include "homectx/eca_rules.hpp"
#include "homectx/messages.hpp"
#include "homectx/task_model.hpp"
#include "homectx/trace.hpp"

namespace homectx {
class ContextStore;
}

namespace homectx::eca {

/// Context read access for conditions: (subject, predicate) -> value.
using ContextLookup = std::function<std::optional<Value>(const EntityRef&, const std::string&)>;

ContextLookup store_lookup(const ContextStore& store);

/// Resolves `name` from the event's variables, then from context by
/// splitting at the last dot into subject.predicate.
Value resolve_variable(const std::string& name, const Event& event, const ContextLookup& lookup);

/// Null condition is true. Throws UnboundVariable or TypeError.
bool evaluate_condition(const Expr* condition, const Event& event, const ContextLookup& lookup);

/// Performs one action. Exceptions propagate to the caller, which records
/// them in the trace.
using ActionDispatcher = std::function<void(const ActionSpec&, const Event&)>;

/// `stamp | state | event | action`
std::string trace_line(VirtualTime stamp, const std::string& state, const std::string& event,
                       const std::string& action);

/// Reactive rules: every rule fires whenever its event arrives.
class RuleEngine {
public:
    RuleEngine(MessageBus& bus, ContextLookup lookup, ActionDispatcher dispatch, TraceLog* trace = nullptr);
    ~RuleEngine();

    RuleEngine(const RuleEngine&) = delete;
    RuleEngine& operator=(const RuleEngine&) = delete;

    /// One subscription per distinct event name of the set. Throws
    /// DuplicateSubscription when a set with the same label is compiled.
    std::vector<SubscriptionHandle> compile_subscriptions(const RuleSet& rs);

    void unsubscribe(const std::string& label);
    void unsubscribe_all();

    std::size_t subscription_count() const;
    std::uint64_t actions_dispatched() const { return dispatched_; }

private:
    struct Compiled {
        RuleSet set;
        std::vector<SubscriptionHandle> subs;
    };

    void on_event(const Compiled& c, const Event& ev);

    MessageBus& bus_;
    ContextLookup lookup_;
    ActionDispatcher dispatch_;
    TraceLog* trace_;
    std::map<std::string, std::unique_ptr<Compiled>> compiled_;
    std::uint64_t dispatched_ = 0;
};

enum class RunState { Idle, Running, Suspended, Completed, Failed, Cancelled };

std::string_view to_string(RunState s);

/// Automaton position: rule set index, rule index within it, loop round.
struct StepPosition {
    std::size_t set = 0;
    std::size_t rule = 0;
    std::uint64_t round = 0;

    friend bool operator==(const StepPosition&, const StepPosition&) = default;
};

struct Transition {
    VirtualTime stamp = 0;
    std::string state;
    std::string event;
    std::string action;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct ProcedureOptions {
    /// Virtual-time budget per automaton step; 0 disables the timeout.
    VirtualTime step_budget = 0;
};

/// A task-contract procedure run as a finite automaton over its rule sets.
///
/// Rule sets execute one after another. In sequence mode each rule is a
/// step completed by the arrival of its event; the rule's actions run only
/// when its condition holds. In choice mode the first rule whose event
/// arrives with a true condition completes the set. Loop mode cycles its
/// rules until the stop event arrives. When a set completes, the event that
/// completed it is offered to the next set as well.
class ProcedureRun {
public:
    using FinishHook = std::function<void(const ProcedureRun&)>;

    ProcedureRun(std::string name, std::vector<RuleSet> sets, MessageBus& bus, ContextLookup lookup,
                 ActionDispatcher dispatch, TraceLog* trace = nullptr, ProcedureOptions options = {});
    ~ProcedureRun();

    ProcedureRun(const ProcedureRun&) = delete;
    ProcedureRun& operator=(const ProcedureRun&) = delete;

    void on_finish(FinishHook hook) { finish_hook_ = std::move(hook); }

    void start();
    /// Freezes the current step; events arriving while suspended are ignored
    /// and the step timer is paused.
    void suspend();
    void resume();
    void cancel();

    RunState state() const { return state_; }
    StepPosition position() const { return pos_; }
    const std::string& name() const { return name_; }
    std::string state_label() const;
    const std::vector<Transition>& transitions() const { return transitions_; }
    std::optional<ErrorCode> failure() const { return failure_; }
    const std::string& failure_message() const { return failure_message_; }
    std::uint64_t actions_dispatched() const { return dispatched_; }

private:
    void on_event(const Event& ev);
    bool offer(const Event& ev);
    void fire(const Rule& rule, const Event& ev);
    void complete_set(const Event& ev);
    void enter_step();
    void arm_timer(VirtualTime budget);
    void disarm_timer();
    void finish(RunState s);
    void record(const std::string& event, const std::string& action);

    std::string name_;
    std::vector<RuleSet> sets_;
    MessageBus& bus_;
    ContextLookup lookup_;
    ActionDispatcher dispatch_;
    TraceLog* trace_;
    ProcedureOptions options_;
    FinishHook finish_hook_;

    RunState state_ = RunState::Idle;
    StepPosition pos_;
    std::vector<SubscriptionHandle> subs_;
    std::vector<Transition> transitions_;
    std::optional<VirtualClock::TimerId> timer_;
    VirtualTime timer_deadline_ = 0;
    VirtualTime paused_remaining_ = 0;
    std::uint64_t step_serial_ = 0;
    std::optional<ErrorCode> failure_;
    std::string failure_message_;
    std::uint64_t dispatched_ = 0;
};

/// Rule sets of a contract's procedure, in execution order. Rule-file
/// procedures are parsed; child-task procedures are flattened recursively.
std::vector<RuleSet> procedure_rule_sets(const TaskContract& tc, const TaskLibrary& library);

/// Requirements of the contract and, for child procedures, of its children.
std::vector<std::string> procedure_requirements(const TaskContract& tc, const TaskLibrary& library);

/// Throws RequirementUnsatisfied naming every requirement for which
/// `discoverable` is false.
void check_requirements(const std::vector<std::string>& requirements,
                        const std::function<bool(const std::string&)>& discoverable);

struct ProcedureEnv {
    MessageBus* bus = nullptr;
    ContextLookup lookup;
    ActionDispatcher dispatch;
    std::function<bool(const std::string&)> discoverable;
    TraceLog* trace = nullptr;
    ProcedureOptions options;
    ProcedureRun::FinishHook on_finish;
};

/// Checks requirements, then builds and starts the automaton.
std::unique_ptr<ProcedureRun> execute_procedure(const TaskContract& tc, const TaskLibrary& library,
                                                const ProcedureEnv& env);

}  // namespace homectx::eca
