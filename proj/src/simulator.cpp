#include "homectx/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "homectx/error.hpp"

namespace homectx {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kEntryKinds[] = {"assert", "event", "join",  "leave",        "infer",
                                   "learn",  "submit", "service_leave", "service_state", "note"};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string resolve(const std::string& base, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).lexically_normal().string();
}

VirtualTime parse_at(const json& j, std::size_t index) {
    if (j.is_number_integer()) return j.get<VirtualTime>();
    if (j.is_string()) {
        if (auto t = parse_stamp(j.get<std::string>())) return *t;
    }
    throw Error(ErrorCode::ParseError, "timeline entry " + std::to_string(index) + ": bad time " + j.dump());
}

std::string lexical(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

Value value_of(const json& j) {
    if (j.is_boolean()) return Value::boolean(j.get<bool>());
    if (j.is_number()) return Value::number(j.get<double>());
    return Value::parse(lexical(j));
}

struct DeviceEmit {
    std::string name;
    EventKind kind = EventKind::Service;
    VirtualTime delay = 0;
};

struct DeviceAssert {
    std::string subject, predicate, object;
};

struct MethodBehavior {
    std::vector<DeviceEmit> emits;
    std::vector<DeviceAssert> asserts;
    bool fail = false;
};

struct DeviceScript {
    std::map<std::string, MethodBehavior> methods;
    VirtualTime latency_lo = 0, latency_hi = 0;
};

std::map<std::string, DeviceScript> device_scripts(const std::string& seed_text) {
    std::map<std::string, DeviceScript> out;
    const json doc = json::parse(seed_text);
    const json& services = doc.is_object() ? doc.at("services") : doc;
    for (const auto& s : services) {
        DeviceScript script;
        if (s.contains("latency_ms")) {
            const auto& l = s.at("latency_ms");
            if (l.is_array()) {
                script.latency_lo = l.at(0).get<VirtualTime>();
                script.latency_hi = l.at(1).get<VirtualTime>();
            } else {
                script.latency_lo = script.latency_hi = l.get<VirtualTime>();
            }
        }
        const json behaviors = s.value("behaviors", json::object());
        for (const auto& [method, b] : behaviors.items()) {
            MethodBehavior mb;
            for (const auto& e : b.value("emit", json::array()))
                mb.emits.push_back({e.at("name").get<std::string>(),
                                    parse_event_kind(e.value("kind", std::string("service"))),
                                    e.value("delay_ms", VirtualTime{0})});
            for (const auto& a : b.value("assert", json::array()))
                mb.asserts.push_back({a.at("subject").get<std::string>(), a.at("predicate").get<std::string>(),
                                      lexical(a.at("object"))});
            mb.fail = b.value("fail", false);
            script.methods.emplace(method, std::move(mb));
        }
        out.emplace(s.at("id").get<std::string>(), std::move(script));
    }
    return out;
}

std::uint64_t mix(std::uint64_t seed, const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Scripted actuator answering on the service topic.
class VirtualDevice {
public:
    VirtualDevice(Middleware& mw, ServiceDescriptor d, DeviceScript script, std::uint64_t seed)
        : mw_(mw), d_(std::move(d)), script_(std::move(script)), rng_(mix(seed, d_.id)) {}

    void operator()(const Message& request, const Replier& reply) {
        const auto* inv = std::get_if<Invocation>(&request.payload);
        Response resp;
        resp.status = ResponseStatus::Ok;
        const MethodBehavior* b = nullptr;
        if (!inv) {
            resp.status = ResponseStatus::Failed;
            resp.detail = "not an invocation";
        } else if (auto it = script_.methods.find(inv->method); it != script_.methods.end()) {
            b = &it->second;
            if (b->fail) {
                resp.status = ResponseStatus::Failed;
                resp.detail = "scripted failure";
            }
        }
        if (b && resp.status == ResponseStatus::Ok) perform(*b);
        resp.state.emplace("device", Value::entity(d_.id));

        VirtualTime latency = script_.latency_lo;
        if (script_.latency_hi > script_.latency_lo)
            latency = std::uniform_int_distribution<VirtualTime>(script_.latency_lo, script_.latency_hi)(rng_);
        if (latency <= 0) {
            reply(std::move(resp));
        } else {
            mw_.clock().schedule_after(latency, [reply, resp] { reply(resp); });
        }
    }

private:
    void perform(const MethodBehavior& b) {
        for (const auto& a : b.asserts) {
            if (!mw_.store().is_live(d_.id)) mw_.store().provider_join(ProviderId{d_.id, ProviderKind::HardwareSim});
            mw_.store().assert_triple(
                Triple{EntityRef{a.subject}, a.predicate, Value::parse(a.object), d_.id, mw_.clock().now()});
        }
        for (const auto& e : b.emits) {
            auto publish = [this, e] {
                Event ev;
                ev.kind = e.kind;
                ev.name = e.name;
                ev.stamp = mw_.clock().now();
                ev.variables.emplace("device", Value::entity(d_.id));
                mw_.bus().publish(event_topic(ev.name), "event", d_.id, ev);
            };
            if (e.delay > 0)
                mw_.clock().schedule_after(e.delay, publish);
            else
                publish();
        }
    }

    Middleware& mw_;
    ServiceDescriptor d_;
    DeviceScript script_;
    std::mt19937_64 rng_;
};

bool contains_text(const std::vector<std::string>& lines, const std::string& needle, std::size_t* count = nullptr) {
    std::size_t n = 0;
    for (const auto& l : lines)
        if (l.find(needle) != std::string::npos) ++n;
    if (count) *count = n;
    return n > 0;
}

/// Every needle found on a later line than the previous one.
bool in_order(const std::vector<std::string>& lines, const std::vector<std::string>& needles, std::string& missing) {
    std::size_t from = 0;
    for (const auto& n : needles) {
        bool found = false;
        for (std::size_t i = from; i < lines.size(); ++i) {
            if (lines[i].find(n) != std::string::npos) {
                from = i + 1;
                found = true;
                break;
            }
        }
        if (!found) {
            missing = n;
            return false;
        }
    }
    return true;
}

AssertionResult check(const json& a, const ExitReport& r) {
    AssertionResult res;
    const auto kind = a.at("kind").get<std::string>();
    res.description = a.value("description", kind + " " + a.dump());
    if (kind == "actuator_log_contains" || kind == "actuator_log_absent" || kind == "trace_contains" ||
        kind == "trace_absent") {
        const auto& lines = kind.rfind("actuator", 0) == 0 ? r.actuator_log : r.trace;
        const auto text = a.at("text").get<std::string>();
        std::size_t n = 0;
        contains_text(lines, text, &n);
        if (kind.find("absent") != std::string::npos) {
            res.passed = n == 0;
            res.detail = std::to_string(n) + " matching line(s)";
        } else if (a.contains("count")) {
            res.passed = n == a.at("count").get<std::size_t>();
            res.detail = std::to_string(n) + " matching line(s)";
        } else {
            res.passed = n > 0;
            res.detail = n ? "found" : "'" + text + "' not found";
        }
    } else if (kind == "trace_order" || kind == "sched_order" || kind == "actuator_order") {
        const auto& lines = kind == "actuator_order" ? r.actuator_log : r.trace;
        std::string missing;
        res.passed = in_order(lines, a.at("sequence").get<std::vector<std::string>>(), missing);
        if (!res.passed) res.detail = "'" + missing + "' missing or out of order";
    } else if (kind == "store") {
        const auto subject = a.at("subject").get<std::string>();
        const auto predicate = a.at("predicate").get<std::string>();
        const bool want_present = a.value("present", true);
        std::optional<Value> want;
        if (a.contains("object")) want = value_of(a.at("object"));
        bool present = false;
        for (const auto& t : r.final_store)
            if (t.subject.uri == subject && t.predicate == predicate && (!want || t.object == *want)) present = true;
        res.passed = present == want_present;
        res.detail = present ? "present" : "absent";
    } else if (kind == "inferred") {
        const auto solution = a.at("solution").get<std::string>();
        const bool any = a.value("any", false);
        const bool want_accept = a.value("accepted", true);
        const double tol = a.value("tolerance", 0.005);
        auto matches = [&](const InferenceRecord& rec) {
            const auto* best = rec.result.best();
            if (!best || best->solution != solution || rec.result.accepted != want_accept) return false;
            if (a.contains("similarity") && std::fabs(best->similarity - a.at("similarity").get<double>()) > tol)
                return false;
            return true;
        };
        if (r.inferences.empty()) {
            res.detail = "no inference ran";
        } else if (any) {
            for (const auto& rec : r.inferences) res.passed = res.passed || matches(rec);
            res.detail = res.passed ? "matched" : "no inference matched";
        } else {
            const auto& last = r.inferences.back();
            res.passed = matches(last);
            const auto* best = last.result.best();
            res.detail = best ? best->solution + " sim=" + format_real(best->similarity) +
                                    (last.result.accepted ? " accepted" : " rejected")
                              : "empty ranking";
        }
    } else if (kind == "sched_state") {
        const auto task = a.at("task").get<std::string>();
        const auto state = a.at("state").get<std::string>();
        std::string seen = "no instance";
        for (const auto& inst : r.instances)
            if (inst.task.str() == task || inst.name == task) seen = std::string(to_string(inst.state));
        res.passed = seen == state;
        res.detail = "last instance " + seen;
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown assertion kind '" + kind + "'");
    }
    return res;
}

std::string summary(const TimelineEntry& e) {
    const auto& b = e.body;
    if (e.kind == "assert")
        return b.at("subject").get<std::string>() + " " + b.at("predicate").get<std::string>() + " " +
               lexical(b.at("object")) + " by " + b.at("provider").get<std::string>();
    if (e.kind == "event") return b.at("name").get<std::string>();
    if (e.kind == "join" || e.kind == "leave") return b.at("provider").get<std::string>();
    if (e.kind == "learn") return b.at("solution").get<std::string>();
    if (e.kind == "submit") return b.at("task").get<std::string>();
    if (e.kind == "service_leave") return b.at("service").get<std::string>();
    if (e.kind == "service_state") return b.at("service").get<std::string>() + " " + b.at("state").get<std::string>();
    if (e.kind == "note") return b.value("text", std::string{});
    return "";
}

void apply(Middleware& mw, const TimelineEntry& e) {
    const auto& b = e.body;
    const auto now = mw.clock().now();
    if (e.kind == "assert") {
        mw.store().assert_triple(Triple{EntityRef{b.at("subject").get<std::string>()}, b.at("predicate").get<std::string>(),
                                        value_of(b.at("object")), b.at("provider").get<std::string>(), now});
    } else if (e.kind == "event") {
        Event ev;
        ev.kind = parse_event_kind(b.value("event_kind", std::string("context")));
        ev.name = b.at("name").get<std::string>();
        ev.stamp = now;
        const json vars = b.value("variables", json::object());
        for (const auto& [k, v] : vars.items()) ev.variables.emplace(k, value_of(v));
        mw.bus().publish(event_topic(ev.name), "event", b.value("source", std::string("scenario")), ev);
    } else if (e.kind == "join") {
        mw.store().provider_join(ProviderId{b.at("provider").get<std::string>(),
                                            parse_provider_kind(b.value("provider_kind", std::string("hardware-sim")))});
    } else if (e.kind == "leave") {
        mw.store().provider_leave(b.at("provider").get<std::string>());
    } else if (e.kind == "infer") {
        mw.infer();
    } else if (e.kind == "learn") {
        mw.learn(b.at("solution").get<std::string>());
    } else if (e.kind == "submit") {
        mw.scheduler().submit(TaskId(b.at("task").get<std::string>()));
    } else if (e.kind == "service_leave") {
        mw.services().unregister(b.at("service").get<std::string>());
    } else if (e.kind == "service_state") {
        mw.services().set_state(b.at("service").get<std::string>(),
                                parse_service_state(b.at("state").get<std::string>()));
    }
}

}  // namespace

const AssertionResult* ExitReport::first_failure() const {
    for (const auto& a : assertions)
        if (!a.passed) return &a;
    return nullptr;
}

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    Scenario s;
    try {
        s.name = doc.value("name", std::string("scenario"));
        s.seed = doc.value("seed", std::uint64_t{1});
        s.tasks_path = resolve(base_dir, doc.at("tasks").get<std::string>());
        s.cases_path = resolve(base_dir, doc.at("cases").get<std::string>());
        s.services_path = resolve(base_dir, doc.at("services").get<std::string>());
        if (doc.contains("zones")) s.zones_path = resolve(base_dir, doc.at("zones").get<std::string>());
        for (const auto& r : doc.value("rules", json::array())) s.rule_paths.push_back(resolve(base_dir, r.get<std::string>()));
        if (doc.contains("theta")) s.theta = doc.at("theta").get<double>();
        if (doc.contains("clock_subject")) s.clock_subject = doc.at("clock_subject").get<std::string>();
        s.auto_infer = doc.value("auto_infer", true);
        s.parallel = doc.value("parallel", 1);
        s.step_budget = doc.value("step_budget_ms", VirtualTime{0});
        if (doc.contains("start")) s.start = parse_at(doc.at("start"), 0);
        if (doc.contains("end")) s.end = parse_at(doc.at("end"), 0);
        for (const auto& p : doc.value("providers", json::array()))
            s.providers.push_back({p.at("id").get<std::string>(),
                                   parse_provider_kind(p.value("kind", std::string("hardware-sim")))});
        std::size_t i = 0;
        VirtualTime last = s.start;
        for (const auto& e : doc.at("timeline")) {
            TimelineEntry t;
            t.index = i++;
            t.at = parse_at(e.at("at"), t.index);
            t.kind = e.at("kind").get<std::string>();
            if (std::find(std::begin(kEntryKinds), std::end(kEntryKinds), t.kind) == std::end(kEntryKinds))
                throw Error(ErrorCode::InvalidConfig, "timeline entry " + std::to_string(t.index) + ": unknown kind '" + t.kind + "'");
            if (t.at < last)
                throw Error(ErrorCode::InvalidConfig, "timeline entry " + std::to_string(t.index) + " goes back in time");
            last = t.at;
            t.body = e;
            s.timeline.push_back(std::move(t));
        }
        s.assertions = doc.value("assertions", json::array());
        for (const auto& a : s.assertions) (void)a.at("kind");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    return parse_scenario(read_file(path), fs::path(path).parent_path().string());
}

ExitReport run_scenario(const Scenario& scenario, const RunOptions& options) {
    return run_scenario(scenario, options, {});
}

ExitReport run_scenario(const std::string& path, const RunOptions& options) {
    return run_scenario(load_scenario(path), options, {});
}

ExitReport run_scenario(const Scenario& sc, const RunOptions& options, const InspectHook& inspect) {
    const auto seed = options.seed.value_or(sc.seed);
    ZoneMap zones;
    if (options.zones_path)
        zones = ZoneMap::load(*options.zones_path);
    else if (sc.zones_path)
        zones = ZoneMap::load(*sc.zones_path);

    TaskLibrary library = load_definitions(sc.tasks_path);
    CaseBaseOptions copts;
    copts.zones = zones;
    CaseBase cases = load_case_base(sc.cases_path, copts);
    const std::string seed_text = read_file(sc.services_path);
    const ServiceSeed services = parse_service_seed(seed_text);
    const auto scripts = device_scripts(seed_text);

    RuntimeConfig cfg;
    cfg.similarity = SimilarityConfig::from_library(library, options.theta.value_or(sc.theta.value_or(0.6)));
    cfg.zones = zones;
    cfg.parallel = options.parallel.value_or(sc.parallel);
    cfg.step_budget = sc.step_budget;
    cfg.clock_subject = sc.clock_subject;

    VirtualClock clock(sc.start);
    Middleware mw(clock, std::move(library), std::move(cases), cfg);
    if (options.bus_log) mw.bus().set_tap(options.bus_log);
    if (options.trace_out) mw.trace().mirror_to(options.trace_out);

    for (const auto& t : services.types) mw.services().register_type(t);
    std::vector<std::shared_ptr<VirtualDevice>> devices;
    for (const auto& d : services.services) {
        auto it = scripts.find(d.id);
        auto dev = std::make_shared<VirtualDevice>(mw, d, it == scripts.end() ? DeviceScript{} : it->second, seed);
        devices.push_back(dev);
        mw.services().register_service(d, [dev](const Message& m, const Replier& r) { (*dev)(m, r); });
    }
    for (const auto& path : sc.rule_paths) {
        const auto file = eca::parse_rules(read_file(path));
        for (const auto& rs : file.sets) mw.rules().compile_subscriptions(rs);
    }
    for (const auto& p : sc.providers) mw.store().provider_join(ProviderId{p.id, p.kind});

    mw.trace().append(format_stamp(clock.now()) + " SIM scenario " + sc.name + " seed=" + std::to_string(seed));
    for (std::size_t i = 0; i < sc.timeline.size(); ++i) {
        const auto& e = sc.timeline[i];
        if (sc.end && e.at > *sc.end) break;
        clock.advance_to(e.at);
        mw.trace().append(format_stamp(clock.now()) + " SIM " + e.kind + " " + summary(e));
        apply(mw, e);
        const bool tick_ends = i + 1 == sc.timeline.size() || sc.timeline[i + 1].at != e.at;
        if (tick_ends && sc.auto_infer && mw.context_dirty()) mw.infer();
    }
    if (sc.end) {
        clock.advance_to(*sc.end);
    } else {
        for (int guard = 0; guard < 100000 && clock.run_next(); ++guard) {
        }
    }
    mw.trace().append(format_stamp(clock.now()) + " SIM end");

    ExitReport r;
    r.scenario = sc.name;
    r.trace = mw.trace().lines();
    for (const auto& rec : mw.services().actuator_log()) r.actuator_log.push_back(rec.to_string());
    r.inferences = mw.inferences();
    r.instances = mw.scheduler().history();
    r.final_store = mw.store().all();
    if (inspect) inspect(mw);
    for (const auto& a : sc.assertions) r.assertions.push_back(check(a, r));
    r.exit_code = r.first_failure() ? 1 : 0;
    return r;
}

}  // namespace homectx
