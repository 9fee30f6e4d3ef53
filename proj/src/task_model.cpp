#include "homectx/task_model.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "homectx/error.hpp"

namespace homectx {

using nlohmann::json;

TaskId::TaskId(std::string path) : path_(std::move(path)) {
    if (!is_valid(path_)) throw Error(ErrorCode::InvalidTaskId, "invalid task id '" + path_ + "'");
}

bool TaskId::is_valid(std::string_view path) {
    if (path.empty()) return false;
    bool seg_start = true;
    for (char c : path) {
        if (c == '.') {
            if (seg_start) return false;
            seg_start = true;
        } else if (c >= '0' && c <= '9') {
            if (seg_start && c == '0') return false;
            seg_start = false;
        } else {
            return false;
        }
    }
    return !seg_start;
}

std::size_t TaskId::depth() const { return std::count(path_.begin(), path_.end(), '.') + 1; }

std::optional<TaskId> TaskId::parent() const {
    auto dot = path_.rfind('.');
    if (dot == std::string::npos) return std::nullopt;
    return TaskId(path_.substr(0, dot));
}

bool TaskId::is_ancestor_of(const TaskId& other) const {
    return other.path_.size() > path_.size() && other.path_.compare(0, path_.size(), path_) == 0 &&
           other.path_[path_.size()] == '.';
}

std::string_view to_string(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::Numeric: return "numeric";
        case AttributeKind::Ratio: return "ratio";
        case AttributeKind::Interval: return "interval";
        case AttributeKind::Categorical: return "categorical";
        case AttributeKind::Boolean: return "boolean";
    }
    return "?";
}

AttributeKind parse_attribute_kind(std::string_view s) {
    if (s == "numeric") return AttributeKind::Numeric;
    if (s == "ratio") return AttributeKind::Ratio;
    if (s == "interval") return AttributeKind::Interval;
    if (s == "categorical") return AttributeKind::Categorical;
    if (s == "boolean") return AttributeKind::Boolean;
    throw Error(ErrorCode::InvalidConfig, "unknown attribute kind '" + std::string(s) + "'");
}

void AttributeDescriptor::validate() const {
    if (name.empty()) throw Error(ErrorCode::InvalidConfig, "attribute name must be non-empty");
    if (subject.uri.empty() || predicate.empty())
        throw Error(ErrorCode::InvalidConfig, "attribute '" + name + "' needs subject and predicate");
    if (!(dom > 0.0)) throw Error(ErrorCode::InvalidConfig, "attribute '" + name + "' needs dom > 0");
    if (weight && !(*weight > 0.0 && *weight <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "attribute '" + name + "' weight must lie in (0,1]");
    if (kind == AttributeKind::Interval && expected && !expected->is_interval())
        throw Error(ErrorCode::InvalidConfig, "interval attribute '" + name + "' needs an interval expected value");
}

const AttributeDescriptor* ConditionSpec::find(const std::string& name) const {
    for (const auto& a : attributes)
        if (a.name == name) return &a;
    return nullptr;
}

std::vector<std::string> ConditionSpec::names() const {
    std::vector<std::string> out;
    for (const auto& a : attributes) out.push_back(a.name);
    return out;
}

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Root: return "root";
        case TaskKind::Composite: return "composite";
        case TaskKind::Atomic: return "atomic";
    }
    return "?";
}

bool Procedure::empty() const {
    return is_steps() ? steps().empty() : children().empty();
}

TaskLibrary TaskLibrary::build(std::vector<Task> tasks, std::vector<TaskContract> contracts) {
    if (tasks.empty()) throw Error(ErrorCode::EmptyLibrary, "task library has no tasks");
    TaskLibrary lib;
    for (auto& t : tasks) {
        if (t.priority < 0 || t.priority > 9)
            throw Error(ErrorCode::InvalidConfig, "task " + t.id.str() + " priority must be 0..9");
        std::set<std::string> names;
        for (const auto& a : t.condition.attributes) {
            a.validate();
            if (!names.insert(a.name).second)
                throw Error(ErrorCode::InvalidConfig, "task " + t.id.str() + " repeats attribute " + a.name);
        }
        if (t.contract.empty()) t.contract = t.id.str();
        if (t.contract != t.id.str())
            throw Error(ErrorCode::InvalidConfig, "task " + t.id.str() + " contract id must equal the task id");
        auto id = t.id;
        if (!lib.tasks_.emplace(id, std::move(t)).second) throw Error(ErrorCode::DuplicateTaskId, id.str());
    }

    std::vector<TaskId> roots;
    for (const auto& [id, t] : lib.tasks_) {
        auto parent = id.parent();
        if (!parent || !lib.tasks_.count(*parent)) roots.push_back(id);
    }
    if (roots.size() != 1) {
        // Only one task may lack its parent; every other orphan is dangling.
        auto top = *std::min_element(roots.begin(), roots.end(),
                                     [](const TaskId& a, const TaskId& b) { return a.depth() < b.depth() || (a.depth() == b.depth() && a < b); });
        for (const auto& r : roots)
            if (r != top) throw Error(ErrorCode::DanglingParent, "task " + r.str() + " has no parent in the library");
    }
    lib.root_ = roots.front();

    for (auto& [id, t] : lib.tasks_) {
        const bool leaf = lib.children(id).empty();
        t.kind = leaf ? TaskKind::Atomic : (id == lib.root_ ? TaskKind::Root : TaskKind::Composite);
    }

    for (auto& c : contracts) {
        if (!lib.tasks_.count(c.id)) throw Error(ErrorCode::UnknownTask, "contract " + c.id.str() + " has no task");
        if (c.parent_task && c.parent_task != c.id.parent())
            throw Error(ErrorCode::InvalidConfig, "contract " + c.id.str() + " names the wrong parent task");
        auto id = c.id;
        if (!lib.contracts_.emplace(id, std::move(c)).second) throw Error(ErrorCode::DuplicateTaskId, "contract " + id.str());
    }
    return lib;
}

const Task& TaskLibrary::task(const TaskId& id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::UnknownTask, id.str());
    return it->second;
}

const Task* TaskLibrary::find(const TaskId& id) const {
    auto it = tasks_.find(id);
    return it == tasks_.end() ? nullptr : &it->second;
}

const Task* TaskLibrary::find_by_name(const std::string& name) const {
    for (const auto& [id, t] : tasks_)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<TaskId> TaskLibrary::children(const TaskId& id) const {
    std::vector<TaskId> out;
    for (const auto& [cid, t] : tasks_)
        if (cid.parent() == id) out.push_back(cid);
    return out;
}

std::vector<const Task*> TaskLibrary::tasks() const {
    std::vector<const Task*> out;
    for (const auto& [id, t] : tasks_) out.push_back(&t);
    return out;
}

std::vector<const TaskContract*> TaskLibrary::contracts() const {
    std::vector<const TaskContract*> out;
    for (const auto& [id, c] : contracts_) out.push_back(&c);
    return out;
}

ConditionSpec TaskLibrary::effective_condition(const TaskId& id) const {
    std::vector<const Task*> chain;
    for (const Task* t = &task(id); t;) {
        chain.push_back(t);
        auto parent = t->id.parent();
        t = parent ? find(*parent) : nullptr;
    }
    ConditionSpec out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        for (const auto& attr : (*it)->condition.attributes) {
            auto existing = std::find_if(out.attributes.begin(), out.attributes.end(),
                                         [&](const AttributeDescriptor& a) { return a.name == attr.name; });
            if (existing != out.attributes.end())
                *existing = attr;
            else
                out.attributes.push_back(attr);
        }
    }
    return out;
}

std::strong_ordering TaskLibrary::compare_urgency(const TaskId& a, const TaskId& b) const {
    const Task* ta = &task(a);
    const Task* tb = &task(b);
    if (a == b) return std::strong_ordering::equal;
    auto up = [this](const Task* t) -> const Task* {
        if (!t) return nullptr;
        auto p = t->id.parent();
        return p ? find(*p) : nullptr;
    };
    for (const Task *x = ta, *y = tb; x || y; x = up(x), y = up(y)) {
        const int px = x ? x->priority : -1;
        const int py = y ? y->priority : -1;
        if (px != py) return px <=> py;
    }
    return std::strong_ordering::equal;
}

std::strong_ordering TaskLibrary::compare_priority(const TaskId& a, const TaskId& b) const {
    if (auto c = compare_urgency(a, b); c != 0) return c;
    // Smaller id is more urgent, so the comparison is reversed.
    return b <=> a;
}

const TaskContract& TaskLibrary::resolve_contract(const TaskId& id) const {
    const Task& t = task(id);
    auto it = contracts_.find(id);
    if (it == contracts_.end()) throw Error(ErrorCode::MissingContract, "task " + id.str() + " has no contract");
    const auto& c = it->second;
    if (c.procedure.empty()) throw Error(ErrorCode::MissingContract, "contract " + id.str() + " has an empty procedure");
    if (t.kind == TaskKind::Atomic && !c.procedure.is_steps())
        throw Error(ErrorCode::MissingContract, "atomic task " + id.str() + " needs rule steps, not children");
    if (t.kind != TaskKind::Atomic) {
        if (c.procedure.is_steps())
            throw Error(ErrorCode::MissingContract, "composite task " + id.str() + " needs a children procedure");
        for (const auto& child : c.procedure.children())
            if (child.parent() != id)
                throw Error(ErrorCode::MissingContract, "contract " + id.str() + " lists non-child " + child.str());
    }
    return c;
}

namespace {

int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

Value value_from_json(const json& j) {
    if (j.is_boolean()) return Value::boolean(j.get<bool>());
    if (j.is_number()) return Value::number(j.get<double>());
    if (j.is_string()) return Value::parse(j.get<std::string>());
    throw Error(ErrorCode::InvalidConfig, "value must be a string, number or boolean");
}

AttributeDescriptor attribute_from_json(const json& j) {
    AttributeDescriptor a;
    a.name = j.at("name").get<std::string>();
    a.subject = EntityRef{j.at("subject").get<std::string>()};
    a.predicate = j.at("predicate").get<std::string>();
    if (j.contains("object")) a.object = value_from_json(j.at("object"));
    a.kind = parse_attribute_kind(j.value("kind", std::string("categorical")));
    if (j.contains("expected")) a.expected = value_from_json(j.at("expected"));
    a.dom = j.value("dom", 1.0);
    if (j.contains("weight")) a.weight = j.at("weight").get<double>();
    return a;
}

json attribute_to_json(const AttributeDescriptor& a) {
    json j;
    j["name"] = a.name;
    j["subject"] = a.subject.uri;
    j["predicate"] = a.predicate;
    if (a.object) j["object"] = a.object->to_lexical();
    j["kind"] = std::string(to_string(a.kind));
    if (a.expected) j["expected"] = a.expected->to_lexical();
    j["dom"] = a.dom;
    if (a.weight) j["weight"] = *a.weight;
    return j;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TaskLibrary parse_definitions(const std::string& json_text, const std::string& base_dir) {
    if (json_text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(ErrorCode::EmptyLibrary, "task definition file is empty");
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SourceError(ErrorCode::ParseError, line_of(json_text, e.byte), 1, e.what());
    }
    std::vector<Task> tasks;
    std::vector<TaskContract> contracts;
    try {
        for (const auto& jt : doc.at("tasks")) {
            Task t;
            t.id = TaskId(jt.at("id").get<std::string>());
            t.name = jt.at("name").get<std::string>();
            t.priority = jt.value("priority", 0);
            t.contract = jt.value("contract", t.id.str());
            if (jt.contains("condition"))
                for (const auto& ja : jt.at("condition")) t.condition.attributes.push_back(attribute_from_json(ja));
            tasks.push_back(std::move(t));
        }
        if (doc.contains("contracts")) {
            for (const auto& jc : doc.at("contracts")) {
                TaskContract c;
                c.id = TaskId(jc.at("id").get<std::string>());
                c.name = jc.value("name", std::string{});
                if (jc.contains("parent_task")) c.parent_task = TaskId(jc.at("parent_task").get<std::string>());
                if (jc.contains("requirement")) c.requirement = jc.at("requirement").get<std::vector<std::string>>();
                const auto& jp = jc.at("procedure");
                if (jp.contains("children")) {
                    std::vector<TaskId> kids;
                    for (const auto& k : jp.at("children")) kids.emplace_back(k.get<std::string>());
                    c.procedure.body = std::move(kids);
                } else {
                    std::vector<RuleSource> steps;
                    for (const auto& js : jp.at("rules")) {
                        RuleSource src;
                        src.file = js.value("file", std::string{});
                        if (js.contains("text"))
                            src.text = js.at("text").get<std::string>();
                        else if (!src.file.empty())
                            src.text = read_file(std::filesystem::path(base_dir) / src.file);
                        steps.push_back(std::move(src));
                    }
                    c.procedure.body = std::move(steps);
                }
                contracts.push_back(std::move(c));
            }
        }
    } catch (const json::exception& e) {
        throw SourceError(ErrorCode::ParseError, 0, 0, std::string("task definitions: ") + e.what());
    }
    return TaskLibrary::build(std::move(tasks), std::move(contracts));
}

TaskLibrary load_definitions(const std::string& path) {
    const auto text = read_file(path);
    auto base = std::filesystem::path(path).parent_path();
    auto lib = parse_definitions(text, base.empty() ? "." : base.string());
    for (const Task* t : lib.tasks()) lib.resolve_contract(t->id);
    return lib;
}

void save_definitions(const TaskLibrary& lib, std::ostream& out) {
    json doc;
    doc["tasks"] = json::array();
    doc["contracts"] = json::array();
    for (const Task* t : lib.tasks()) {
        json jt;
        jt["id"] = t->id.str();
        jt["name"] = t->name;
        jt["priority"] = t->priority;
        jt["contract"] = t->contract;
        jt["condition"] = json::array();
        for (const auto& a : t->condition.attributes) jt["condition"].push_back(attribute_to_json(a));
        doc["tasks"].push_back(jt);
    }
    for (const TaskContract* c : lib.contracts()) {
        json jc;
        jc["id"] = c->id.str();
        jc["name"] = c->name;
        if (c->parent_task) jc["parent_task"] = c->parent_task->str();
        jc["requirement"] = c->requirement;
        if (c->procedure.is_steps()) {
            json rules = json::array();
            for (const auto& s : c->procedure.steps()) rules.push_back({{"file", s.file}, {"text", s.text}});
            jc["procedure"] = {{"rules", rules}};
        } else {
            json kids = json::array();
            for (const auto& k : c->procedure.children()) kids.push_back(k.str());
            jc["procedure"] = {{"children", kids}};
        }
        doc["contracts"].push_back(jc);
    }
    out << doc.dump(2) << '\n';
}

}  // namespace homectx
