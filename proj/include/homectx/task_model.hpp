#pragma once

#include <compare>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "homectx/context_store.hpp"
#include "homectx/value.hpp"

namespace homectx {

/// Dotted hierarchical task id ("1.1.1.3"). The parent is the id minus its
/// last segment.
class TaskId {
public:
    TaskId() = default;
    explicit TaskId(std::string path);

    static bool is_valid(std::string_view path);

    const std::string& str() const { return path_; }
    std::size_t depth() const;
    std::optional<TaskId> parent() const;
    bool is_ancestor_of(const TaskId& other) const;

    friend bool operator==(const TaskId&, const TaskId&) = default;
    friend auto operator<=>(const TaskId&, const TaskId&) = default;

private:
    std::string path_;
};

enum class AttributeKind { Numeric, Ratio, Interval, Categorical, Boolean };

std::string_view to_string(AttributeKind kind);
AttributeKind parse_attribute_kind(std::string_view s);

/// One context attribute of a task condition, with everything needed to
/// score an observation against its expected value.
struct AttributeDescriptor {
    std::string name;
    EntityRef subject;
    std::string predicate;
    std::optional<Value> object;  // multi-valued predicates only
    AttributeKind kind = AttributeKind::Categorical;
    std::optional<Value> expected;
    double dom = 1.0;  // maximal difference, or the denominator for ratio kind
    std::optional<double> weight;

    AttributeBinding binding() const { return {name, subject, predicate, object}; }
    std::string key() const { return attribute_key(subject, predicate, object); }

    /// Throws InvalidConfig when dom/weight/expected break the kind's rules.
    void validate() const;

    friend bool operator==(const AttributeDescriptor&, const AttributeDescriptor&) = default;
};

struct ConditionSpec {
    std::vector<AttributeDescriptor> attributes;

    const AttributeDescriptor* find(const std::string& name) const;
    std::vector<std::string> names() const;

    friend bool operator==(const ConditionSpec&, const ConditionSpec&) = default;
};

enum class TaskKind { Root, Composite, Atomic };

std::string_view to_string(TaskKind kind);

struct Task {
    TaskId id;
    std::string name;
    ConditionSpec condition;
    int priority = 0;  // 0..9, larger is more urgent
    std::string contract;
    TaskKind kind = TaskKind::Atomic;

    friend bool operator==(const Task&, const Task&) = default;
};

/// Rule text of one procedure step. `file` records where it came from.
struct RuleSource {
    std::string file;
    std::string text;

    friend bool operator==(const RuleSource&, const RuleSource&) = default;
};

struct Procedure {
    std::variant<std::vector<RuleSource>, std::vector<TaskId>> body;

    bool is_steps() const { return body.index() == 0; }
    const std::vector<RuleSource>& steps() const { return std::get<0>(body); }
    const std::vector<TaskId>& children() const { return std::get<1>(body); }
    bool empty() const;

    friend bool operator==(const Procedure&, const Procedure&) = default;
};

struct TaskContract {
    TaskId id;
    std::string name;
    std::optional<TaskId> parent_task;
    std::vector<std::string> requirement;
    Procedure procedure;

    friend bool operator==(const TaskContract&, const TaskContract&) = default;
};

/// Validated, immutable task hierarchy plus contracts.
class TaskLibrary {
public:
    /// Checks ids, parents and the single-root rule, and derives task kinds.
    /// Contracts are stored as given; resolve_contract validates them.
    static TaskLibrary build(std::vector<Task> tasks, std::vector<TaskContract> contracts);

    const Task& task(const TaskId& id) const;
    const Task* find(const TaskId& id) const;
    const Task* find_by_name(const std::string& name) const;
    bool contains(const TaskId& id) const { return tasks_.count(id) != 0; }

    const TaskId& root() const { return root_; }
    std::vector<TaskId> children(const TaskId& id) const;
    std::vector<const Task*> tasks() const;
    std::vector<const TaskContract*> contracts() const;
    std::size_t size() const { return tasks_.size(); }

    /// Union of the task's condition with its ancestors'; on a name clash
    /// the deepest descriptor wins (in the ancestor's position).
    ConditionSpec effective_condition(const TaskId& id) const;

    /// Ordering by urgency: `greater` means `a` runs before `b`. Compares Pr,
    /// then the parents' Pr level by level (a missing level counts as -1),
    /// then the lexicographically smaller id.
    std::strong_ordering compare_priority(const TaskId& a, const TaskId& b) const;

    /// compare_priority without the id tie-break; `equal` for tasks whose
    /// Pr chains match.
    std::strong_ordering compare_urgency(const TaskId& a, const TaskId& b) const;

    const TaskContract& resolve_contract(const TaskId& id) const;

    friend bool operator==(const TaskLibrary&, const TaskLibrary&) = default;

private:
    std::map<TaskId, Task> tasks_;
    std::map<TaskId, TaskContract> contracts_;
    TaskId root_;
};

/// Reads the JSON task definition file. Rule files named by procedure steps
/// are resolved relative to the definition file.
TaskLibrary load_definitions(const std::string& path);
TaskLibrary parse_definitions(const std::string& json_text, const std::string& base_dir = ".");

void save_definitions(const TaskLibrary& lib, std::ostream& out);

}  // namespace homectx
