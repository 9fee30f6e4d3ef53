#include "homectx/context_store.hpp"

#include <charconv>
#include <mutex>

#include "homectx/csv.hpp"
#include "homectx/error.hpp"

namespace homectx {

namespace {

constexpr const char* kTripleHeader = "subj,prop,obj,provider,stamp";

bool valid_predicate(const std::string& p) {
    if (p.empty()) return false;
    for (char c : p)
        if (c == '/' || c == '*' || c == ' ' || c == '\t' || c == '\n') return false;
    return true;
}

}  // namespace

std::string_view to_string(DeltaKind kind) {
    switch (kind) {
        case DeltaKind::Inserted: return "inserted";
        case DeltaKind::Replaced: return "replaced";
        case DeltaKind::NoOp: return "noop";
        case DeltaKind::Removed: return "removed";
    }
    return "?";
}

std::string attribute_key(const EntityRef& subject, const std::string& predicate, const std::optional<Value>& object) {
    std::string key = subject.uri + "|" + predicate;
    if (object) key += "|" + object->symbol();
    return key;
}

std::string attribute_key(const AttributeBinding& binding) {
    return attribute_key(binding.subject, binding.predicate, binding.object);
}

std::size_t ContextSnapshot::present_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
        if (e.value) ++n;
    return n;
}

const SnapshotEntry* ContextSnapshot::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

const SnapshotEntry* ContextSnapshot::find_key(const std::string& key) const {
    for (const auto& e : entries_)
        if (attribute_key(e.binding) == key) return &e;
    return nullptr;
}

std::optional<Value> ContextSnapshot::by_predicate(const std::string& predicate) const {
    for (const auto& e : entries_)
        if (e.binding.predicate == predicate) return e.value;
    return std::nullopt;
}

ContextStore::ContextStore(MessageBus& bus, StoreOptions options) : bus_(bus), options_(std::move(options)) {}

bool ContextStore::is_multi_valued(const std::string& predicate) const {
    return options_.multi_valued_predicates.count(predicate) != 0;
}

ContextStore::Key ContextStore::key_for(const Triple& t) const {
    return {t.subject.uri, t.predicate, is_multi_valued(t.predicate) ? t.object.symbol() : std::string{}};
}

void ContextStore::provider_join(const ProviderId& provider) {
    if (provider.id.empty()) throw Error(ErrorCode::InvalidArgument, "provider id must be non-empty");
    std::unique_lock lock(mutex_);
    if (providers_.count(provider.id)) throw Error(ErrorCode::DuplicateProvider, provider.id);
    providers_.emplace(provider.id, provider);
}

bool ContextStore::is_live(const std::string& provider_id) const {
    std::shared_lock lock(mutex_);
    return providers_.count(provider_id) != 0;
}

std::vector<ProviderId> ContextStore::providers() const {
    std::shared_lock lock(mutex_);
    std::vector<ProviderId> out;
    for (const auto& [id, p] : providers_) out.push_back(p);
    return out;
}

StoreDelta ContextStore::assert_triple(Triple t) {
    if (!valid_predicate(t.predicate)) throw Error(ErrorCode::InvalidValue, "invalid predicate '" + t.predicate + "'");
    if (t.subject.uri.empty()) throw Error(ErrorCode::InvalidValue, "subject must be non-empty");

    StoreDelta delta;
    {
        std::unique_lock lock(mutex_);
        if (!providers_.count(t.provider)) throw Error(ErrorCode::UnknownProvider, t.provider);
        auto last = last_stamp_.find(t.provider);
        if (last != last_stamp_.end() && t.stamp < last->second)
            throw Error(ErrorCode::NonMonotoneStamp, "provider " + t.provider + " stamp went backwards");
        last_stamp_[t.provider] = t.stamp;

        auto key = key_for(t);
        auto it = triples_.find(key);
        if (it == triples_.end()) {
            delta.kind = DeltaKind::Inserted;
            triples_.emplace(key, t);
        } else if (it->second.object == t.object && it->second.provider == t.provider) {
            delta.kind = DeltaKind::NoOp;
            delta.current = it->second;
            return delta;
        } else {
            delta.kind = DeltaKind::Replaced;
            delta.previous = it->second;
            it->second = t;
        }
        delta.current = t;
    }
    bus_.publish("context/" + t.predicate, "assert", t.provider, t);
    return delta;
}

std::size_t ContextStore::provider_leave(const std::string& provider_id) {
    std::vector<Triple> removed;
    {
        std::unique_lock lock(mutex_);
        if (!providers_.erase(provider_id)) throw Error(ErrorCode::UnknownProvider, provider_id);
        last_stamp_.erase(provider_id);
        for (auto it = triples_.begin(); it != triples_.end();) {
            if (it->second.provider == provider_id) {
                removed.push_back(std::move(it->second));
                it = triples_.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (const auto& t : removed) bus_.publish("context/" + t.predicate, "retract", provider_id, t);
    return removed.size();
}

std::vector<Triple> ContextStore::query_pattern(const TriplePattern& q) const {
    if (!q.subject && !q.predicate && !q.object)
        throw Error(ErrorCode::InvalidPattern, "triple pattern needs at least one bound position");
    std::shared_lock lock(mutex_);
    std::vector<Triple> out;
    auto matches = [&](const Triple& t) {
        if (q.predicate && t.predicate != *q.predicate) return false;
        if (q.object && !(t.object == *q.object) && t.object.symbol() != q.object->symbol()) return false;
        return true;
    };
    if (q.subject) {
        auto it = triples_.lower_bound(Key{q.subject->uri, "", ""});
        for (; it != triples_.end() && std::get<0>(it->first) == q.subject->uri; ++it)
            if (matches(it->second)) out.push_back(it->second);
    } else {
        for (const auto& [k, t] : triples_)
            if (matches(t)) out.push_back(t);
    }
    return out;
}

std::optional<Value> ContextStore::lookup(const EntityRef& subject, const std::string& predicate) const {
    std::shared_lock lock(mutex_);
    auto it = triples_.lower_bound(Key{subject.uri, predicate, ""});
    if (it != triples_.end() && std::get<0>(it->first) == subject.uri && std::get<1>(it->first) == predicate)
        return it->second.object;
    return std::nullopt;
}

ContextSnapshot ContextStore::snapshot_attributes(std::span<const AttributeBinding> bindings) const {
    std::shared_lock lock(mutex_);
    std::vector<SnapshotEntry> entries;
    entries.reserve(bindings.size());
    for (const auto& b : bindings) {
        SnapshotEntry e{b.name, b, std::nullopt};
        if (b.object && is_multi_valued(b.predicate)) {
            auto it = triples_.find(Key{b.subject.uri, b.predicate, b.object->symbol()});
            if (it != triples_.end()) e.value = it->second.object;
        } else {
            auto it = triples_.lower_bound(Key{b.subject.uri, b.predicate, ""});
            if (it != triples_.end() && std::get<0>(it->first) == b.subject.uri && std::get<1>(it->first) == b.predicate)
                e.value = it->second.object;
        }
        entries.push_back(std::move(e));
    }
    return ContextSnapshot(std::move(entries));
}

std::vector<Triple> ContextStore::all() const {
    std::shared_lock lock(mutex_);
    std::vector<Triple> out;
    out.reserve(triples_.size());
    for (const auto& [k, t] : triples_) out.push_back(t);
    return out;
}

std::size_t ContextStore::size() const {
    std::shared_lock lock(mutex_);
    return triples_.size();
}

void ContextStore::dump_csv(std::ostream& out) const {
    auto triples = all();
    write_triples_csv(out, triples);
}

void ContextStore::load_csv(std::istream& in) {
    for (auto& t : read_triples_csv(in)) {
        if (!is_live(t.provider)) provider_join(ProviderId{t.provider, ProviderKind::SoftwareSim});
        assert_triple(std::move(t));
    }
}

void write_triples_csv(std::ostream& out, std::span<const Triple> triples) {
    out << kTripleHeader << '\n';
    for (const auto& t : triples)
        out << csv::join({t.subject.uri, t.predicate, t.object.to_lexical(), t.provider, std::to_string(t.stamp)}) << '\n';
}

std::vector<Triple> read_triples_csv(std::istream& in) {
    std::vector<Triple> out;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!header) {
            if (line.rfind(kTripleHeader, 0) != 0)
                throw SourceError(ErrorCode::ParseError, lineno, 1, std::string("expected header '") + kTripleHeader + "'");
            header = true;
            continue;
        }
        auto fields = csv::split(line);
        if (!fields || fields->size() != 5)
            throw SourceError(ErrorCode::ParseError, lineno, 1, "expected 5 fields");
        auto& f = *fields;
        Triple t;
        try {
            t.subject = EntityRef{f[0]};
            t.predicate = f[1];
            t.object = Value::parse(f[2]);
        } catch (const Error& e) {
            throw SourceError(ErrorCode::ParseError, lineno, 1, e.what());
        }
        t.provider = f[3];
        long long stamp = 0;
        auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), stamp);
        if (ec != std::errc{} || p != f[4].data() + f[4].size() || f[0].empty() || f[1].empty() || f[3].empty())
            throw SourceError(ErrorCode::ParseError, lineno, 1, "malformed triple row");
        t.stamp = stamp;
        out.push_back(std::move(t));
    }
    if (!header) throw SourceError(ErrorCode::ParseError, 1, 1, "missing header");
    return out;
}

}  // namespace homectx
