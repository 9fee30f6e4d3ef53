#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homectx/clock.hpp"
#include "homectx/runtime.hpp"

namespace homectx {

struct TimelineEntry {
    VirtualTime at = 0;
    std::string kind;
    nlohmann::json body;
    std::size_t index = 0;
};

struct ProviderSpec {
    std::string id;
    ProviderKind kind = ProviderKind::HardwareSim;
};

/// Scripted scenario. Paths are resolved against the scenario file's
/// directory when loaded from disk.
struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    std::string tasks_path;
    std::string cases_path;
    std::string services_path;
    std::optional<std::string> zones_path;
    std::vector<std::string> rule_paths;  // reactive rule files
    std::optional<double> theta;
    std::optional<std::string> clock_subject;
    bool auto_infer = true;
    int parallel = 1;
    VirtualTime step_budget = 0;
    VirtualTime start = 0;
    std::optional<VirtualTime> end;  // cutoff: later timeline entries and timers are dropped
    std::vector<ProviderSpec> providers;
    std::vector<TimelineEntry> timeline;
    nlohmann::json assertions = nlohmann::json::array();
};

/// Accepts "at" as milliseconds or "HH:MM[:SS[.mmm]]". Throws ParseError or
/// InvalidConfig (timeline times decreasing, unknown entry kind).
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> theta;
    std::optional<std::string> zones_path;
    std::optional<int> parallel;
    std::ostream* bus_log = nullptr;
    std::ostream* trace_out = nullptr;
};

struct AssertionResult {
    std::string description;
    bool passed = false;
    std::string detail;
};

struct ExitReport {
    int exit_code = 0;
    std::string scenario;
    std::vector<AssertionResult> assertions;
    std::vector<std::string> trace;
    std::vector<std::string> actuator_log;
    std::vector<InferenceRecord> inferences;
    std::vector<TaskInstance> instances;
    std::vector<Triple> final_store;

    const AssertionResult* first_failure() const;
};

/// Builds the middleware, plays the timeline on the virtual clock and checks
/// the embedded assertions. exit_code is 0 iff every assertion passes.
ExitReport run_scenario(const Scenario& scenario, const RunOptions& options = {});
ExitReport run_scenario(const std::string& path, const RunOptions& options = {});

/// Hooks for tests: the same run, with access to the live middleware before
/// assertions are evaluated.
using InspectHook = std::function<void(Middleware&)>;
ExitReport run_scenario(const Scenario& scenario, const RunOptions& options, const InspectHook& inspect);

}  // namespace homectx
