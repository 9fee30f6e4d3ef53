// homectx: command-line front end for the context middleware and simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "homectx/bench.hpp"
#include "homectx/eca_rules.hpp"
#include "homectx/error.hpp"
#include "homectx/runtime.hpp"
#include "homectx/simulator.hpp"

using namespace homectx;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<double> theta;
    std::string bus_log;
    std::string trace;
    std::string zones;
    std::optional<int> parallel;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw Error(ErrorCode::Io, "cannot write " + path);
    return f;
}

ZoneMap zones_from(const Globals& g) { return g.zones.empty() ? ZoneMap{} : ZoneMap::load(g.zones); }

int cmd_run(const Globals& g, const std::string& path) {
    RunOptions opt;
    opt.seed = g.seed;
    opt.theta = g.theta;
    opt.parallel = g.parallel;
    if (!g.zones.empty()) opt.zones_path = g.zones;
    auto bus_log = open_out(g.bus_log);
    auto trace = open_out(g.trace);
    opt.bus_log = bus_log.get();
    opt.trace_out = trace.get();

    const auto report = run_scenario(path, opt);
    if (!trace)
        for (const auto& l : report.trace) std::cout << l << '\n';
    for (const auto& l : report.actuator_log) std::cout << "ACT " << l << '\n';
    for (const auto& a : report.assertions)
        std::cout << (a.passed ? "PASS " : "FAIL ") << a.description << (a.detail.empty() ? "" : " (" + a.detail + ")")
                  << '\n';
    if (const auto* f = report.first_failure()) {
        std::cerr << "scenario " << report.scenario << ": assertion failed: " << f->description;
        if (!f->detail.empty()) std::cerr << " (" << f->detail << ")";
        std::cerr << '\n';
    }
    return report.exit_code;
}

std::vector<int> expand_range(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(part));
            } else {
                const int lo = std::stoi(part.substr(0, dash)), hi = std::stoi(part.substr(dash + 1));
                for (int v = lo; v <= hi; ++v) out.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "bad range '" + spec + "'");
        }
    }
    return out;
}

int cmd_bench(const Globals& g, const std::string& cases, const std::string& attrs, int reps, const std::string& out) {
    BenchSpec spec = BenchSpec::defaults();
    if (!cases.empty()) spec.cases = expand_range(cases);
    if (!attrs.empty()) spec.attrs = expand_range(attrs);
    spec.repetitions = reps;
    if (g.seed) spec.seed = *g.seed;
    const auto rows = bench_reasoner(spec);
    if (auto f = open_out(out))
        write_bench_csv(*f, rows);
    else
        write_bench_csv(std::cout, rows);
    if (rows.size() >= 2) {
        const auto fit = fit_latency(rows);
        std::fprintf(stderr, "# latency ~ %.3e ms per case*attr + %.3e ms, R^2 = %.4f\n", fit.slope, fit.intercept, fit.r2);
    }
    return 0;
}

int cmd_infer(const Globals& g, const std::string& snapshot, const std::string& cases, const std::string& tasks) {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    {
        std::ifstream in(snapshot, std::ios::binary);
        if (!in) throw Error(ErrorCode::Io, "cannot open " + snapshot);
        store.load_csv(in);
    }
    CaseBaseOptions copts;
    copts.zones = zones_from(g);
    auto base = load_case_base(cases, copts);
    const double theta = g.theta.value_or(0.6);
    SimilarityConfig cfg;
    cfg.theta = theta;
    if (!tasks.empty()) cfg = SimilarityConfig::from_library(load_definitions(tasks), theta);
    cfg.validate();

    const auto result = retrieve_best(observe_store(store), base, cfg);
    for (const auto& r : result.ranking)
        std::printf("case=%d solution=%s sim=%.4f usedtime=%llu\n", r.case_id, r.solution.c_str(), r.similarity,
                    static_cast<unsigned long long>(r.usedtime));
    if (const auto* best = result.best())
        std::printf("%s %s sim=%.4f theta=%.2f\n", result.accepted ? "accepted" : "rejected", best->solution.c_str(),
                    best->similarity, theta);
    else
        std::printf("rejected (no candidate) theta=%.2f\n", theta);
    return result.accepted ? 0 : 1;
}

int cmd_parse(const std::string& path, bool tokens) {
    const auto text = slurp(path);
    if (tokens) {
        for (const auto& t : eca::token_texts(text)) std::cout << t << '\n';
        return 0;
    }
    std::cout << eca::pretty_print(eca::parse_rules(text));
    return 0;
}

std::string file_kind(const std::string& path, nlohmann::json& doc) {
    auto ends = [&](const char* ext) {
        const std::string e(ext);
        return path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0;
    };
    if (ends(".eca")) return "rules";
    if (ends(".scn")) return "scenario";
    const auto text = slurp(path);
    if (ends(".csv")) return text.rfind("caseid,", 0) == 0 ? "cases" : "triples";
    doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::ParseError, path + ": not valid JSON");
    if (doc.is_object() && doc.contains("timeline")) return "scenario";
    if (doc.is_object() && doc.contains("tasks")) return "tasks";
    if (doc.is_array() || (doc.is_object() && doc.contains("services"))) return "services";
    if (doc.is_object() && (doc.contains("rooms") || doc.contains("zones"))) return "zones";
    throw Error(ErrorCode::InvalidArgument, path + ": cannot tell what kind of file this is");
}

int cmd_validate(const std::vector<std::string>& paths) {
    int failures = 0;
    for (const auto& path : paths) {
        try {
            nlohmann::json doc;
            const auto kind = file_kind(path, doc);
            std::string detail;
            if (kind == "rules") {
                const auto f = eca::parse_rules(slurp(path));
                detail = std::to_string(f.sets.size()) + " rule sets";
            } else if (kind == "scenario") {
                const auto sc = load_scenario(path);
                (void)load_definitions(sc.tasks_path);
                (void)load_case_base(sc.cases_path);
                (void)parse_service_seed(slurp(sc.services_path));
                for (const auto& r : sc.rule_paths) (void)eca::parse_rules(slurp(r));
                detail = std::to_string(sc.timeline.size()) + " timeline entries, " + std::to_string(sc.assertions.size()) +
                         " assertions";
            } else if (kind == "cases") {
                detail = std::to_string(load_case_base(path).size()) + " cases";
            } else if (kind == "triples") {
                std::ifstream in(path, std::ios::binary);
                detail = std::to_string(read_triples_csv(in).size()) + " triples";
            } else if (kind == "tasks") {
                detail = std::to_string(load_definitions(path).size()) + " tasks";
            } else if (kind == "services") {
                detail = std::to_string(parse_service_seed(doc.dump()).services.size()) + " services";
            } else {
                detail = std::to_string(ZoneMap::load(path).zones().size()) + " zones";
            }
            std::cout << path << ": ok (" << kind << ", " << detail << ")\n";
        } catch (const Error& e) {
            std::cout << path << ": " << e.what() << '\n';
            ++failures;
        }
    }
    return failures ? 1 : 0;
}

int cmd_services(const Globals& g, const std::string& seed_path, const std::string& type, const std::string& location) {
    VirtualClock clock;
    MessageBus bus(clock);
    ServiceManager::Options o;
    o.zones = zones_from(g);
    ServiceManager mgr(bus, o);
    mgr.seed(parse_service_seed(slurp(seed_path)));
    if (!type.empty()) {
        std::optional<std::string> zone;
        if (!location.empty()) zone = o.zones.zone_of(location);
        const auto b = mgr.discover_and_select(type, zone);
        std::cout << b.descriptor.id << " " << b.rationale << '\n';
        return 0;
    }
    for (const auto& d : mgr.list()) {
        std::cout << d.id << " type=" << d.type << " zone=" << (d.zone.empty() ? "-" : d.zone)
                  << " state=" << to_string(d.state);
        if (!d.capabilities.empty()) {
            std::cout << " methods=";
            for (std::size_t i = 0; i < d.capabilities.size(); ++i) std::cout << (i ? "," : "") << d.capabilities[i];
        }
        std::cout << '\n';
    }
    for (const auto& w : mgr.warnings()) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_query(const std::string& store_path, const std::string& subject, const std::string& predicate,
              const std::string& object) {
    VirtualClock clock;
    MessageBus bus(clock);
    ContextStore store(bus);
    std::ifstream in(store_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + store_path);
    store.load_csv(in);
    TriplePattern q;
    if (!subject.empty()) q.subject = EntityRef{subject};
    if (!predicate.empty()) q.predicate = predicate;
    if (!object.empty()) q.object = Value::parse(object);
    const auto hits = store.query_pattern(q);
    write_triples_csv(std::cout, hits);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-driven, task-oriented smart-home middleware and simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    double theta = 0;
    int parallel = 1;
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the scenario's)");
    auto* theta_opt = app.add_option("--theta", theta, "Acceptance threshold in [0,1]")->check(CLI::Range(0.0, 1.0));
    app.add_option("--bus-log", g.bus_log, "Write every bus message to this file");
    app.add_option("--trace", g.trace, "Write the trace to this file instead of stdout");
    app.add_option("--zones", g.zones, "Zone map JSON");
    auto* par_opt = app.add_option("--parallel", parallel, "Concurrently running task instances")->check(CLI::PositiveNumber);

    std::string path;
    auto* run = app.add_subcommand("run", "Play a scenario and check its assertions");
    run->add_option("scenario", path, "Scenario file (.scn)")->required();

    std::string cases_range, attrs_range, bench_out;
    int reps = 7;
    auto* bench = app.add_subcommand("bench", "Time case retrieval over case and attribute counts (CSV)");
    bench->add_option("--cases", cases_range, "Case counts, e.g. 1-20");
    bench->add_option("--attrs", attrs_range, "Attribute counts, e.g. 3-10");
    bench->add_option("--reps", reps, "Timed samples per cell")->check(CLI::Range(2, 1000));
    bench->add_option("--out", bench_out, "CSV output file");

    std::string snapshot, cases, tasks;
    auto* infer = app.add_subcommand("infer", "Retrieve the best case for a context snapshot");
    infer->add_option("--snapshot", snapshot, "Triples CSV")->required();
    infer->add_option("--cases", cases, "Case base CSV")->required();
    infer->add_option("--tasks", tasks, "Task definitions (attribute kinds and weights)");

    bool tokens = false;
    auto* parse = app.add_subcommand("parse", "Parse a rule file and pretty-print it");
    parse->add_option("file", path, "Rule file (.eca)")->required();
    parse->add_flag("--tokens", tokens, "Print the token stream instead");

    std::vector<std::string> files;
    auto* validate = app.add_subcommand("validate", "Check task, case, rule, service, zone and scenario files");
    validate->add_option("files", files, "Files to check")->required();

    std::string seed_file, type, location;
    auto* services = app.add_subcommand("services", "Inspect a service seed file");
    services->require_subcommand(1);
    auto* services_list = services->add_subcommand("list", "List registered services");
    services_list->add_option("seed", seed_file, "Service seed JSON")->required();
    auto* services_select = services->add_subcommand("select", "Bind an abstract type to a provider");
    services_select->add_option("seed", seed_file, "Service seed JSON")->required();
    services_select->add_option("type", type, "Abstract service type")->required();
    services_select->add_option("--location", location, "User location");

    std::string subject, predicate, object;
    auto* query = app.add_subcommand("query", "Pattern query over a triples CSV");
    query->add_option("store", path, "Triples CSV")->required();
    query->add_option("--subject", subject);
    query->add_option("--predicate", predicate);
    query->add_option("--object", object);

    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (*seed_opt) g.seed = seed;
    if (*theta_opt) g.theta = theta;
    if (*par_opt) g.parallel = parallel;

    try {
        if (*run) return cmd_run(g, path);
        if (*bench) return cmd_bench(g, cases_range, attrs_range, reps, bench_out);
        if (*infer) return cmd_infer(g, snapshot, cases, tasks);
        if (*parse) return cmd_parse(path, tokens);
        if (*validate) return cmd_validate(files);
        if (*services_list) return cmd_services(g, seed_file, "", "");
        if (*services_select) return cmd_services(g, seed_file, type, location);
        if (*query) return cmd_query(path, subject, predicate, object);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
