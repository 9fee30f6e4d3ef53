#include "homectx/eca_engine.hpp"

#include <algorithm>
#include <set>

#include "homectx/context_store.hpp"
#include "homectx/error.hpp"

namespace homectx::eca {

ContextLookup store_lookup(const ContextStore& store) {
    return [&store](const EntityRef& subject, const std::string& predicate) { return store.lookup(subject, predicate); };
}

Value resolve_variable(const std::string& name, const Event& event, const ContextLookup& lookup) {
    if (auto it = event.variables.find(name); it != event.variables.end()) return it->second;
    const auto dot = name.rfind('.');
    if (dot != std::string::npos && lookup) {
        if (auto v = lookup(EntityRef{name.substr(0, dot)}, name.substr(dot + 1))) return *v;
    }
    throw Error(ErrorCode::UnboundVariable, "unbound variable '" + name + "'");
}

namespace {

Value operand_value(const Expr& e, const Event& event, const ContextLookup& lookup) {
    if (e.kind != ExprKind::Operand) throw Error(ErrorCode::TypeError, "comparison operand must be a value");
    if (e.operand.kind == Operand::Kind::Literal) return e.operand.literal;
    return resolve_variable(e.operand.lexeme, event, lookup);
}

bool ordered(double a, const std::string& op, double b) {
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    if (op == ">=") return a >= b;
    if (op == "==") return a == b;
    return a != b;
}

bool compare(const Value& a, const std::string& op, const Value& b) {
    const bool equality = op == "==" || op == "!=";
    if (a.is_number() && b.is_number()) {
        const auto& ua = std::get<Number>(a.data()).unit;
        const auto& ub = std::get<Number>(b.data()).unit;
        if (!ua.empty() && !ub.empty() && ua != ub)
            throw Error(ErrorCode::TypeError, "cannot compare " + ua + " with " + ub);
        return ordered(a.as_number(), op, b.as_number());
    }
    if (a.is_time() && b.is_time()) return ordered(a.as_minutes(), op, b.as_minutes());
    const auto textual = [](const Value& v) { return v.is_text() || v.is_entity(); };
    if (equality && ((a.is_boolean() && b.is_boolean()) || (textual(a) && textual(b)))) {
        const bool eq = a.symbol() == b.symbol();
        return op == "==" ? eq : !eq;
    }
    throw Error(ErrorCode::TypeError, "operator " + op + " not defined for " + std::string(to_string(a.kind())) +
                                          " and " + std::string(to_string(b.kind())));
}

bool eval(const Expr& e, const Event& event, const ContextLookup& lookup) {
    switch (e.kind) {
        case ExprKind::Operand: {
            auto v = operand_value(e, event, lookup);
            if (!v.is_boolean())
                throw Error(ErrorCode::TypeError, "'" + e.operand.lexeme + "' is not a boolean");
            return v.as_boolean();
        }
        case ExprKind::Compare:
            return compare(operand_value(*e.args[0], event, lookup), e.op, operand_value(*e.args[1], event, lookup));
        case ExprKind::Not: return !eval(*e.args[0], event, lookup);
        case ExprKind::And: return eval(*e.args[0], event, lookup) && eval(*e.args[1], event, lookup);
        case ExprKind::Or: return eval(*e.args[0], event, lookup) || eval(*e.args[1], event, lookup);
        case ExprKind::Group: return eval(*e.args[0], event, lookup);
    }
    return false;
}

const Event* event_of(const Message& m) { return std::get_if<Event>(&m.payload); }

}  // namespace

bool evaluate_condition(const Expr* condition, const Event& event, const ContextLookup& lookup) {
    return condition ? eval(*condition, event, lookup) : true;
}

std::string trace_line(VirtualTime stamp, const std::string& state, const std::string& event,
                       const std::string& action) {
    return format_stamp(stamp) + " | " + state + " | " + event + " | " + action;
}

// ---------------------------------------------------------------------------

RuleEngine::RuleEngine(MessageBus& bus, ContextLookup lookup, ActionDispatcher dispatch, TraceLog* trace)
    : bus_(bus), lookup_(std::move(lookup)), dispatch_(std::move(dispatch)), trace_(trace) {}

RuleEngine::~RuleEngine() { unsubscribe_all(); }

std::vector<SubscriptionHandle> RuleEngine::compile_subscriptions(const RuleSet& rs) {
    const auto label = rs.label();
    if (compiled_.count(label))
        throw Error(ErrorCode::DuplicateSubscription, "rule set '" + label + "' is already subscribed");
    auto c = std::make_unique<Compiled>();
    c->set = rs;
    std::set<std::string> names;
    for (const auto& r : rs.rules) names.insert(r.event.name);
    const Compiled* raw = c.get();
    for (const auto& name : names) {
        c->subs.push_back(bus_.subscribe(event_topic(name), [this, raw](const Message& m) {
            if (const Event* ev = event_of(m)) on_event(*raw, *ev);
        }));
    }
    auto subs = c->subs;
    compiled_.emplace(label, std::move(c));
    return subs;
}

void RuleEngine::on_event(const Compiled& c, const Event& ev) {
    const auto now = bus_.clock().now();
    for (std::size_t i = 0; i < c.set.rules.size(); ++i) {
        const Rule& r = c.set.rules[i];
        if (r.event.name != ev.name) continue;
        const auto state = c.set.label() + "/r" + std::to_string(i);
        bool holds = false;
        try {
            holds = evaluate_condition(r.condition.get(), ev, lookup_);
        } catch (const Error& e) {
            if (trace_) trace_->append(trace_line(now, state, ev.name, "! " + std::string(to_string(e.code()))));
            continue;
        }
        if (!holds) {
            if (trace_) trace_->append(trace_line(now, state, ev.name, "(condition false)"));
            continue;
        }
        for (const auto& a : r.actions) {
            if (trace_) trace_->append(trace_line(bus_.clock().now(), state, ev.name, a.to_string()));
            ++dispatched_;
            try {
                dispatch_(a, ev);
            } catch (const Error& e) {
                if (trace_)
                    trace_->append(trace_line(bus_.clock().now(), state, ev.name, "! " + std::string(to_string(e.code()))));
                break;
            }
        }
    }
}

void RuleEngine::unsubscribe(const std::string& label) {
    auto it = compiled_.find(label);
    if (it == compiled_.end()) return;
    for (auto& s : it->second->subs) s.cancel();
    compiled_.erase(it);
}

void RuleEngine::unsubscribe_all() {
    for (auto& [label, c] : compiled_)
        for (auto& s : c->subs) s.cancel();
    compiled_.clear();
}

std::size_t RuleEngine::subscription_count() const {
    std::size_t n = 0;
    for (const auto& [label, c] : compiled_) n += c->subs.size();
    return n;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RunState s) {
    switch (s) {
        case RunState::Idle: return "idle";
        case RunState::Running: return "running";
        case RunState::Suspended: return "suspended";
        case RunState::Completed: return "completed";
        case RunState::Failed: return "failed";
        case RunState::Cancelled: return "cancelled";
    }
    return "?";
}

ProcedureRun::ProcedureRun(std::string name, std::vector<RuleSet> sets, MessageBus& bus, ContextLookup lookup,
                           ActionDispatcher dispatch, TraceLog* trace, ProcedureOptions options)
    : name_(std::move(name)),
      sets_(std::move(sets)),
      bus_(bus),
      lookup_(std::move(lookup)),
      dispatch_(std::move(dispatch)),
      trace_(trace),
      options_(options) {}

ProcedureRun::~ProcedureRun() {
    disarm_timer();
    for (auto& s : subs_) s.cancel();
}

std::string ProcedureRun::state_label() const {
    switch (state_) {
        case RunState::Completed:
        case RunState::Failed:
        case RunState::Cancelled: return name_ + "/" + std::string(to_string(state_));
        default: break;
    }
    std::string s = name_ + "/S" + std::to_string(pos_.set) + "." + std::to_string(pos_.rule);
    if (pos_.round) s += "#" + std::to_string(pos_.round);
    return s;
}

void ProcedureRun::record(const std::string& event, const std::string& action) {
    Transition t{bus_.clock().now(), state_label(), event, action};
    if (trace_) trace_->append(trace_line(t.stamp, t.state, t.event, t.action));
    transitions_.push_back(std::move(t));
}

void ProcedureRun::start() {
    if (state_ != RunState::Idle) return;
    std::set<std::string> names;
    for (const auto& rs : sets_) {
        for (const auto& r : rs.rules) names.insert(r.event.name);
        if (rs.stop_event) names.insert(rs.stop_event->name);
    }
    for (const auto& name : names) {
        subs_.push_back(bus_.subscribe(event_topic(name), [this](const Message& m) {
            if (const Event* ev = event_of(m)) on_event(*ev);
        }));
    }
    state_ = RunState::Running;
    record("(start)", "-");
    enter_step();
}

void ProcedureRun::enter_step() {
    // Plain sets without rules have nothing to wait for.
    while (pos_.set < sets_.size() && sets_[pos_.set].rules.empty() && sets_[pos_.set].mode != RuleMode::Loop) {
        ++pos_.set;
        pos_.rule = 0;
        pos_.round = 0;
    }
    if (pos_.set >= sets_.size()) {
        finish(RunState::Completed);
        return;
    }
    ++step_serial_;
    disarm_timer();
    if (options_.step_budget > 0) arm_timer(options_.step_budget);
}

void ProcedureRun::arm_timer(VirtualTime budget) {
    const auto serial = step_serial_;
    timer_deadline_ = bus_.clock().now() + budget;
    timer_ = bus_.clock().schedule_at(timer_deadline_, [this, serial] {
        timer_.reset();
        if (state_ != RunState::Running || serial != step_serial_) return;
        failure_ = ErrorCode::StepTimeout;
        failure_message_ = "step " + state_label() + " timed out after " + std::to_string(options_.step_budget) + " ms";
        record("(timeout)", "! StepTimeout");
        finish(RunState::Failed);
    });
}

void ProcedureRun::disarm_timer() {
    if (timer_) bus_.clock().cancel(*timer_);
    timer_.reset();
}

void ProcedureRun::on_event(const Event& ev) {
    if (state_ != RunState::Running) return;
    // A completed set hands the same event to the next one.
    while (state_ == RunState::Running && offer(ev)) {
    }
}

bool ProcedureRun::offer(const Event& ev) {
    const RuleSet& rs = sets_[pos_.set];
    switch (rs.mode) {
        case RuleMode::Sequence: {
            const Rule& r = rs.rules[pos_.rule];
            if (r.event.name != ev.name) return false;
            fire(r, ev);
            if (state_ == RunState::Failed || state_ == RunState::Cancelled) return false;
            if (++pos_.rule < rs.rules.size()) {
                enter_step();
                return false;
            }
            complete_set(ev);
            return state_ == RunState::Running;
        }
        case RuleMode::Choice: {
            for (const Rule& r : rs.rules) {
                if (r.event.name != ev.name) continue;
                bool holds = false;
                try {
                    holds = evaluate_condition(r.condition.get(), ev, lookup_);
                } catch (const Error& e) {
                    record(ev.name, "! " + std::string(to_string(e.code())));
                    continue;
                }
                if (!holds) continue;
                fire(r, ev);
                if (state_ == RunState::Failed || state_ == RunState::Cancelled) return false;
                complete_set(ev);
                return state_ == RunState::Running;
            }
            return false;
        }
        case RuleMode::Loop: {
            if (rs.stop_event && rs.stop_event->name == ev.name) {
                record(ev.name, "(loop stop)");
                complete_set(ev);
                return state_ == RunState::Running;
            }
            if (rs.rules.empty()) return false;
            const Rule& r = rs.rules[pos_.rule];
            if (r.event.name != ev.name) return false;
            fire(r, ev);
            if (state_ == RunState::Failed || state_ == RunState::Cancelled) return false;
            if (++pos_.rule == rs.rules.size()) {
                pos_.rule = 0;
                ++pos_.round;
            }
            enter_step();
            return false;
        }
    }
    return false;
}

void ProcedureRun::fire(const Rule& r, const Event& ev) {
    bool holds = false;
    if (sets_[pos_.set].mode == RuleMode::Choice) {
        holds = true;  // checked by the caller
    } else {
        try {
            holds = evaluate_condition(r.condition.get(), ev, lookup_);
        } catch (const Error& e) {
            record(ev.name, "! " + std::string(to_string(e.code())));
            return;
        }
    }
    if (!holds) {
        record(ev.name, "(condition false)");
        return;
    }
    for (const auto& a : r.actions) {
        record(ev.name, a.to_string());
        ++dispatched_;
        try {
            dispatch_(a, ev);
        } catch (const Error& e) {
            failure_ = e.code();
            failure_message_ = a.to_string() + ": " + e.what();
            record(ev.name, "! " + std::string(to_string(e.code())));
            finish(RunState::Failed);
            return;
        }
    }
}

void ProcedureRun::complete_set(const Event& ev) {
    (void)ev;
    ++pos_.set;
    pos_.rule = 0;
    pos_.round = 0;
    enter_step();
}

void ProcedureRun::suspend() {
    if (state_ != RunState::Running) return;
    state_ = RunState::Suspended;
    if (timer_) {
        paused_remaining_ = std::max<VirtualTime>(1, timer_deadline_ - bus_.clock().now());
        disarm_timer();
    } else {
        paused_remaining_ = 0;
    }
    record("(suspend)", "-");
}

void ProcedureRun::resume() {
    if (state_ != RunState::Suspended) return;
    state_ = RunState::Running;
    record("(resume)", "-");
    if (paused_remaining_ > 0) arm_timer(paused_remaining_);
}

void ProcedureRun::cancel() {
    if (state_ == RunState::Completed || state_ == RunState::Failed || state_ == RunState::Cancelled) return;
    finish(RunState::Cancelled);
}

void ProcedureRun::finish(RunState s) {
    disarm_timer();
    for (auto& sub : subs_) sub.cancel();
    state_ = s;
    record("(" + std::string(to_string(s)) + ")", "-");
    if (finish_hook_) finish_hook_(*this);
}

// ---------------------------------------------------------------------------

namespace {

void collect_sets(const TaskContract& tc, const TaskLibrary& library, std::vector<RuleSet>& out, int depth) {
    if (depth > 64) throw Error(ErrorCode::MissingContract, "procedure nesting too deep at " + tc.id.str());
    if (tc.procedure.is_steps()) {
        for (const auto& src : tc.procedure.steps()) {
            try {
                auto file = parse_rules(src.text);
                for (auto& rs : file.sets) out.push_back(std::move(rs));
            } catch (const SourceError& e) {
                const auto where = src.file.empty() ? tc.id.str() : src.file;
                throw SourceError(e.code(), e.line(), e.column(), where + ": " + e.what());
            }
        }
        return;
    }
    for (const auto& child : tc.procedure.children())
        collect_sets(library.resolve_contract(child), library, out, depth + 1);
}

void collect_requirements(const TaskContract& tc, const TaskLibrary& library, std::vector<std::string>& out, int depth) {
    if (depth > 64) return;
    for (const auto& r : tc.requirement)
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    if (!tc.procedure.is_steps())
        for (const auto& child : tc.procedure.children())
            collect_requirements(library.resolve_contract(child), library, out, depth + 1);
}

}  // namespace

std::vector<RuleSet> procedure_rule_sets(const TaskContract& tc, const TaskLibrary& library) {
    std::vector<RuleSet> out;
    collect_sets(tc, library, out, 0);
    return out;
}

std::vector<std::string> procedure_requirements(const TaskContract& tc, const TaskLibrary& library) {
    std::vector<std::string> out;
    collect_requirements(tc, library, out, 0);
    return out;
}

void check_requirements(const std::vector<std::string>& requirements,
                        const std::function<bool(const std::string&)>& discoverable) {
    std::string missing;
    for (const auto& r : requirements) {
        if (discoverable && discoverable(r)) continue;
        if (!missing.empty()) missing += ", ";
        missing += r;
    }
    if (!missing.empty()) throw Error(ErrorCode::RequirementUnsatisfied, "missing services: " + missing);
}

std::unique_ptr<ProcedureRun> execute_procedure(const TaskContract& tc, const TaskLibrary& library,
                                                const ProcedureEnv& env) {
    if (!env.bus) throw Error(ErrorCode::InvalidArgument, "procedure environment has no bus");
    check_requirements(procedure_requirements(tc, library), env.discoverable);
    auto run = std::make_unique<ProcedureRun>(tc.id.str(), procedure_rule_sets(tc, library), *env.bus, env.lookup,
                                              env.dispatch, env.trace, env.options);
    if (env.on_finish) run->on_finish(env.on_finish);
    run->start();
    return run;
}

}  // namespace homectx::eca
