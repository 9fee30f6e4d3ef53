#include "homectx/case_base.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "homectx/csv.hpp"
#include "homectx/error.hpp"

namespace homectx {

namespace {

constexpr const char* kCaseHeader = "caseid,subj,prop,obj,usedtime";

template <typename T>
bool parse_int(const std::string& s, T& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

CaseBase::CaseBase(CaseBaseOptions options) : options_(std::move(options)) {}

std::string CaseBase::partition_key(const Case& c) const {
    for (const auto& a : c.problem)
        if (a.predicate == options_.location_predicate) return options_.zones.zone_of(a.value.symbol());
    return kUnlocated;
}

void CaseBase::add(Case c) {
    if (find(c.case_id)) throw Error(ErrorCode::DuplicateId, "case " + std::to_string(c.case_id) + " already stored");
    auto key = partition_key(c);
    if (key != kUnlocated && !options_.zones.is_known(key) && !partitions_.count(key))
        warnings_.push_back("case " + std::to_string(c.case_id) + " opens unconfigured zone '" + key + "'");
    auto& part = partitions_[key];
    auto pos = std::lower_bound(part.begin(), part.end(), c.case_id,
                                [](const Case& x, int id) { return x.case_id < id; });
    part.insert(pos, std::move(c));
}

std::vector<const Case*> CaseBase::cases() const { return candidates(std::nullopt); }

std::vector<const Case*> CaseBase::candidates(const std::optional<std::string>& zone) const {
    std::vector<const Case*> out;
    for (const auto& [key, part] : partitions_) {
        if (zone && key != *zone && key != kUnlocated) continue;
        for (const auto& c : part) out.push_back(&c);
    }
    std::sort(out.begin(), out.end(), [](const Case* a, const Case* b) { return a->case_id < b->case_id; });
    return out;
}

const Case* CaseBase::find(int case_id) const {
    for (const auto& [key, part] : partitions_)
        for (const auto& c : part)
            if (c.case_id == case_id) return &c;
    return nullptr;
}

void CaseBase::bump_usedtime(int case_id) {
    for (auto& [key, part] : partitions_)
        for (auto& c : part)
            if (c.case_id == case_id) {
                ++c.usedtime;
                return;
            }
    throw Error(ErrorCode::InvalidArgument, "no case " + std::to_string(case_id));
}

int CaseBase::next_id() const {
    int max_id = 0;
    for (const auto& [key, part] : partitions_)
        for (const auto& c : part) max_id = std::max(max_id, c.case_id);
    return max_id + 1;
}

std::size_t CaseBase::size() const {
    std::size_t n = 0;
    for (const auto& [key, part] : partitions_) n += part.size();
    return n;
}

std::optional<std::string> CaseBase::snapshot_zone(const ContextSnapshot& snapshot) const {
    if (auto loc = snapshot.by_predicate(options_.location_predicate)) return options_.zones.zone_of(loc->symbol());
    return std::nullopt;
}

Case represent_case(const ContextSnapshot& snapshot, const std::string& solution, int case_id,
                    const CaseBaseOptions& options, std::optional<EntityRef> user) {
    Case c;
    c.case_id = case_id;
    c.solution = solution;
    for (const auto& e : snapshot.entries()) {
        if (!e.value) continue;
        const bool multi = options.multi_valued_predicates.count(e.binding.predicate) != 0;
        c.problem.push_back(make_case_attribute(e.binding.subject, e.binding.predicate, *e.value, multi));
        if (!user && e.binding.predicate == options.location_predicate) user = e.binding.subject;
    }
    if (c.problem.empty()) throw Error(ErrorCode::EmptySnapshot, "snapshot has no present attribute");
    c.user = user ? *user : c.problem.front().subject;
    return c;
}

void persist_case_base(const CaseBase& base, std::ostream& out) {
    out << kCaseHeader << '\n';
    for (const Case* c : base.cases()) {
        const auto used = std::to_string(c->usedtime);
        const auto id = std::to_string(c->case_id);
        for (const auto& a : c->problem)
            out << csv::join({id, a.subject.uri, a.predicate, a.value.to_lexical(), used}) << '\n';
        out << csv::join({id, c->user.uri, base.options().task_predicate, c->solution, used}) << '\n';
    }
}

void persist_case_base(const CaseBase& base, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    persist_case_base(base, out);
}

CaseBase load_case_base(std::istream& in, CaseBaseOptions options) {
    const auto task_predicate = options.task_predicate;
    const auto multi = options.multi_valued_predicates;
    CaseBase base(std::move(options));

    struct Pending {
        Case c;
        bool has_task = false;
        int first_line = 0;
    };
    std::vector<Pending> order;
    std::map<int, std::size_t> index;

    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!header) {
            if (line.rfind(kCaseHeader, 0) != 0)
                throw SourceError(ErrorCode::ParseError, lineno, 1, std::string("expected header '") + kCaseHeader + "'");
            header = true;
            continue;
        }
        auto fields = csv::split(line);
        if (!fields || fields->size() != 5) throw SourceError(ErrorCode::ParseError, lineno, 1, "expected 5 fields");
        auto& f = *fields;
        int id = 0;
        std::uint64_t used = 0;
        if (!parse_int(f[0], id) || id <= 0) throw SourceError(ErrorCode::ParseError, lineno, 1, "bad case id");
        if (!parse_int(f[4], used)) throw SourceError(ErrorCode::ParseError, lineno, 1, "bad usedtime");
        if (f[1].empty() || f[2].empty() || f[3].empty())
            throw SourceError(ErrorCode::ParseError, lineno, 1, "empty subject, property or object");

        auto [it, fresh] = index.emplace(id, order.size());
        if (fresh) {
            order.push_back(Pending{});
            order.back().c.case_id = id;
            order.back().c.usedtime = used;
            order.back().first_line = lineno;
        }
        auto& p = order[it->second];
        if (p.c.usedtime != used) throw SourceError(ErrorCode::ParseError, lineno, 1, "usedtime differs within case");
        if (f[2] == task_predicate) {
            if (p.has_task) throw SourceError(ErrorCode::ParseError, lineno, 1, "second task row for case");
            p.has_task = true;
            p.c.user = EntityRef{f[1]};
            p.c.solution = f[3];
            continue;
        }
        Value v;
        try {
            v = Value::parse(f[3]);
        } catch (const Error& e) {
            throw SourceError(ErrorCode::ParseError, lineno, 1, e.what());
        }
        auto attr = make_case_attribute(EntityRef{f[1]}, f[2], std::move(v), multi.count(f[2]) != 0);
        for (const auto& existing : p.c.problem)
            if (existing.key == attr.key) throw SourceError(ErrorCode::ParseError, lineno, 1, "duplicate attribute " + attr.key);
        p.c.problem.push_back(std::move(attr));
    }
    if (!header) throw SourceError(ErrorCode::ParseError, 1, 1, "missing header");
    for (auto& p : order) {
        if (!p.has_task) throw SourceError(ErrorCode::ParseError, p.first_line, 1, "case has no task row");
        base.add(std::move(p.c));
    }
    return base;
}

CaseBase load_case_base(const std::string& path, CaseBaseOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return load_case_base(in, std::move(options));
}

}  // namespace homectx
