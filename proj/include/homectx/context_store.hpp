#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "homectx/bus.hpp"
#include "homectx/messages.hpp"
#include "homectx/value.hpp"

namespace homectx {

/// Any position left empty is a wildcard; at least one must be bound.
struct TriplePattern {
    std::optional<EntityRef> subject;
    std::optional<std::string> predicate;
    std::optional<Value> object;
};

enum class DeltaKind { Inserted, Replaced, NoOp, Removed };

std::string_view to_string(DeltaKind kind);

struct StoreDelta {
    DeltaKind kind = DeltaKind::NoOp;
    Triple current;
    std::optional<Triple> previous;
};

/// Names one snapshot attribute and where its value lives. `object` is only
/// used for multi-valued predicates: the attribute is present iff the exact
/// triple (subject, predicate, object) is in the store.
struct AttributeBinding {
    std::string name;
    EntityRef subject;
    std::string predicate;
    std::optional<Value> object;

    friend bool operator==(const AttributeBinding&, const AttributeBinding&) = default;
};

/// Identity of an attribute across snapshots and cases:
/// "subject|predicate" or "subject|predicate|object".
std::string attribute_key(const EntityRef& subject, const std::string& predicate,
                          const std::optional<Value>& object = std::nullopt);
std::string attribute_key(const AttributeBinding& binding);

struct SnapshotEntry {
    std::string name;
    AttributeBinding binding;
    std::optional<Value> value;  // nullopt: fact absent from the store
};

/// Immutable attribute vector extracted from the store at one instant.
class ContextSnapshot {
public:
    ContextSnapshot() = default;
    explicit ContextSnapshot(std::vector<SnapshotEntry> entries) : entries_(std::move(entries)) {}

    const std::vector<SnapshotEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t present_count() const;

    const SnapshotEntry* find(const std::string& name) const;
    const SnapshotEntry* find_key(const std::string& key) const;

    /// Value of the first entry whose binding has this predicate.
    std::optional<Value> by_predicate(const std::string& predicate) const;

private:
    std::vector<SnapshotEntry> entries_;
};

struct StoreOptions {
    /// Predicates that may hold several objects per subject ("HasDevice").
    std::set<std::string> multi_valued_predicates{"HasDevice"};
};

/// In-memory context knowledge base.
///
/// Functional predicates hold at most one triple per (subject, predicate);
/// a newer assertion replaces the older one regardless of provider.
/// Every change is announced on `context/<predicate>`.
class ContextStore {
public:
    explicit ContextStore(MessageBus& bus, StoreOptions options = {});

    void provider_join(const ProviderId& provider);
    bool is_live(const std::string& provider_id) const;
    std::vector<ProviderId> providers() const;

    StoreDelta assert_triple(Triple t);

    /// Removes the provider and every triple it supplied. Returns the count.
    std::size_t provider_leave(const std::string& provider_id);

    std::vector<Triple> query_pattern(const TriplePattern& q) const;

    std::optional<Value> lookup(const EntityRef& subject, const std::string& predicate) const;

    ContextSnapshot snapshot_attributes(std::span<const AttributeBinding> bindings) const;

    std::vector<Triple> all() const;
    std::size_t size() const;

    bool is_multi_valued(const std::string& predicate) const;

    void dump_csv(std::ostream& out) const;

    /// Reads a dump. Providers named in it are joined as software-sim when
    /// not already live.
    void load_csv(std::istream& in);

private:
    using Key = std::tuple<std::string, std::string, std::string>;

    Key key_for(const Triple& t) const;

    MessageBus& bus_;
    StoreOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<Key, Triple> triples_;
    std::map<std::string, ProviderId> providers_;
    std::map<std::string, VirtualTime> last_stamp_;
};

std::vector<Triple> read_triples_csv(std::istream& in);
void write_triples_csv(std::ostream& out, std::span<const Triple> triples);

}  // namespace homectx
