#include "homectx/runtime.hpp"

#include <cstdio>

#include "homectx/error.hpp"

namespace homectx {

namespace {

constexpr const char* kClockProvider = "system-clock";

ServiceManager::Options service_options(const RuntimeConfig& cfg) {
    ServiceManager::Options o;
    o.zones = cfg.zones;
    o.location_predicate = cfg.similarity.location_predicate;
    o.request_timeout = cfg.request_timeout;
    return o;
}

std::string format_similarity(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", s);
    return buf;
}

}  // namespace

Middleware::Middleware(VirtualClock& clock, TaskLibrary library, CaseBase cases, RuntimeConfig config)
    : clock_(clock),
      library_(std::move(library)),
      cases_(std::move(cases)),
      config_(std::move(config)),
      bus_(clock_),
      store_(bus_, StoreOptions{cases_.options().multi_valued_predicates}),
      services_(bus_, service_options(config_)),
      scheduler_(library_, clock_, &trace_, config_.parallel),
      rules_(bus_, eca::store_lookup(store_), [this](const eca::ActionSpec& a, const Event& e) { dispatch(a, e); },
             &trace_) {
    config_.similarity.validate();
    context_sub_ = bus_.subscribe("context/*", [this](const Message& m) { on_context(m); });
    scheduler_.set_listener(
        [this](const TaskInstance& inst, InstanceState from, InstanceState to) { on_transition(inst, from, to); });
}

Middleware::~Middleware() {
    context_sub_.cancel();
    scheduler_.set_listener({});
    for (auto& [id, run] : runs_) run->on_finish({});
    runs_.clear();
}

void Middleware::on_context(const Message& m) {
    const auto* t = std::get_if<Triple>(&m.payload);
    if (!t) return;
    dirty_ = true;
    if (m.kind != "assert") return;
    Event ev;
    ev.kind = EventKind::Context;
    ev.name = t->subject.uri + "." + t->predicate;
    ev.variables.emplace(ev.name, t->object);
    ev.variables.emplace("value", t->object);
    ev.stamp = clock_.now();
    bus_.publish(event_topic(ev.name), "event", t->provider, ev);
}

ContextSnapshot observe_store(const ContextStore& store) {
    std::vector<SnapshotEntry> entries;
    for (const auto& t : store.all()) {
        AttributeBinding b{"", t.subject, t.predicate, std::nullopt};
        if (store.is_multi_valued(t.predicate)) b.object = t.object;
        b.name = attribute_key(b);
        entries.push_back(SnapshotEntry{b.name, b, t.object});
    }
    return ContextSnapshot(std::move(entries));
}

ContextSnapshot Middleware::observe() const { return observe_store(store_); }

std::optional<std::string> Middleware::user_zone() const {
    TriplePattern q;
    q.predicate = config_.similarity.location_predicate;
    auto hits = store_.query_pattern(q);
    if (hits.empty()) return std::nullopt;
    return config_.zones.zone_of(hits.front().object.symbol());
}

std::optional<TaskId> Middleware::resolve_solution(const std::string& solution) const {
    if (TaskId::is_valid(solution)) {
        TaskId id(solution);
        if (library_.contains(id)) return id;
    }
    if (const Task* t = library_.find_by_name(solution)) return t->id;
    return std::nullopt;
}

InferenceRecord Middleware::infer() {
    if (config_.clock_subject) {
        if (!clock_provider_joined_) {
            store_.provider_join(ProviderId{kClockProvider, ProviderKind::SoftwareSim});
            clock_provider_joined_ = true;
        }
        const int minutes = static_cast<int>((clock_.now() / kMsPerMinute) % (24 * 60));
        store_.assert_triple(Triple{EntityRef{*config_.clock_subject}, config_.time_predicate,
                                    Value::time_of_day(minutes), kClockProvider, clock_.now()});
    }
    InferenceRecord rec;
    rec.stamp = clock_.now();
    rec.result = retrieve_best(observe(), cases_, config_.similarity);
    dirty_ = false;

    std::string line = format_stamp(rec.stamp) + " INFER ";
    if (const auto* best = rec.result.best()) {
        line += best->solution + " case=" + std::to_string(best->case_id) + " sim=" + format_similarity(best->similarity) +
                (rec.result.accepted ? " accepted" : " rejected");
    } else {
        line += "(no candidate) rejected";
    }
    trace_.append(line);

    if (!rec.result.accepted) {
        last_accepted_.reset();
    } else {
        const auto& solution = rec.result.best()->solution;
        const bool edge = last_accepted_ != solution;
        last_accepted_ = solution;
        if (edge) {
            if (auto id = resolve_solution(solution)) {
                if (!scheduler_.is_live(*id)) {
                    rec.submitted = *id;
                    scheduler_.submit(*id);
                }
            } else {
                trace_.append(format_stamp(rec.stamp) + " INFER solution '" + solution + "' names no task");
            }
        }
    }
    inferences_.push_back(rec);
    return rec;
}

int Middleware::learn(const std::string& solution) {
    const int id = learn_case(observe(), solution, cases_);
    trace_.append(format_stamp(clock_.now()) + " LEARN case=" + std::to_string(id) + " " + solution);
    return id;
}

const eca::ProcedureRun* Middleware::procedure(std::uint64_t instance) const {
    auto it = runs_.find(instance);
    return it == runs_.end() ? nullptr : it->second.get();
}

void Middleware::dispatch(const eca::ActionSpec& action, const Event& cause) {
    (void)cause;
    const auto binding = services_.discover_and_select(action.service, user_zone());
    std::vector<Value> args;
    for (const auto& a : action.args) args.push_back(a.value);
    const auto resp = services_.invoke(binding, action.method, args, action.provider);
    if (resp.status != ResponseStatus::Ok)
        throw Error(ErrorCode::NoResponder, binding.descriptor.id + " failed " + action.method + ": " + resp.detail);
}

void Middleware::start_procedure(const TaskInstance& inst) {
    const auto instance_id = inst.id;
    eca::ProcedureEnv env;
    env.bus = &bus_;
    env.lookup = eca::store_lookup(store_);
    env.dispatch = [this](const eca::ActionSpec& a, const Event& e) { dispatch(a, e); };
    env.discoverable = [this](const std::string& type) { return services_.discoverable(type); };
    env.trace = &trace_;
    env.options.step_budget = config_.step_budget;
    env.on_finish = [this, instance_id](const eca::ProcedureRun& run) {
        auto current = scheduler_.instance(instance_id);
        if (!current) return;
        const auto st = current->state;
        if (st == InstanceState::Completed || st == InstanceState::Aborted) return;
        if (run.state() == eca::RunState::Completed && current->state == InstanceState::Running)
            scheduler_.complete(instance_id);
        else if (run.state() != eca::RunState::Completed)
            scheduler_.abort(instance_id);
    };
    try {
        const auto& contract = library_.resolve_contract(inst.task);
        runs_[instance_id] = eca::execute_procedure(contract, library_, env);
    } catch (const Error& e) {
        trace_.append(format_stamp(clock_.now()) + " EXEC #" + std::to_string(instance_id) + ":" + inst.name + " ! " +
                      std::string(to_string(e.code())) + " " + e.what());
        scheduler_.abort(instance_id);
    }
}

void Middleware::on_transition(const TaskInstance& inst, InstanceState from, InstanceState to) {
    auto it = runs_.find(inst.id);
    eca::ProcedureRun* run = it == runs_.end() ? nullptr : it->second.get();
    switch (to) {
        case InstanceState::Running:
            if (from == InstanceState::Pending && !run)
                start_procedure(inst);
            else if (run)
                run->resume();
            break;
        case InstanceState::Suspended:
            if (run) run->suspend();
            break;
        case InstanceState::Aborted:
            if (run) run->cancel();
            break;
        default: break;
    }
}

}  // namespace homectx
