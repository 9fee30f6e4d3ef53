#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "homectx/context_store.hpp"
#include "homectx/similarity.hpp"
#include "homectx/zones.hpp"

namespace homectx {

/// A stored situation: the observed attribute vector and the task that was
/// being performed. `solution` holds a task id or a task name.
struct Case {
    int case_id = 0;
    EntityRef user;
    ProblemVector problem;
    std::string solution;
    std::uint64_t usedtime = 0;

    friend bool operator==(const Case&, const Case&) = default;
};

struct CaseBaseOptions {
    ZoneMap zones;
    std::set<std::string> multi_valued_predicates{"HasDevice"};
    std::string location_predicate = "User_Locatedin";
    std::string task_predicate = "User_Task";
};

/// Cases partitioned by the zone of their location attribute. Cases without
/// a location attribute live in the "*" partition, which every retrieval
/// scores.
class CaseBase {
public:
    static constexpr const char* kUnlocated = "*";

    explicit CaseBase(CaseBaseOptions options = {});

    std::string partition_key(const Case& c) const;

    /// Throws DuplicateId when the case id is taken.
    void add(Case c);

    const std::map<std::string, std::vector<Case>>& partitions() const { return partitions_; }

    /// All cases ordered by id.
    std::vector<const Case*> cases() const;

    /// Cases in `zone` plus the unlocated partition; every case when zone is
    /// nullopt. Ordered by id.
    std::vector<const Case*> candidates(const std::optional<std::string>& zone) const;

    const Case* find(int case_id) const;
    void bump_usedtime(int case_id);

    int next_id() const;
    std::size_t size() const;

    const CaseBaseOptions& options() const { return options_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Zone named by the snapshot's location attribute, if any.
    std::optional<std::string> snapshot_zone(const ContextSnapshot& snapshot) const;

    friend bool operator==(const CaseBase& a, const CaseBase& b) { return a.partitions_ == b.partitions_; }

private:
    CaseBaseOptions options_;
    std::map<std::string, std::vector<Case>> partitions_;
    std::vector<std::string> warnings_;
};

/// Turns the present entries of a snapshot into a case with usedtime 0.
/// The user defaults to the subject of the location attribute, else the
/// first entry's subject. Throws EmptySnapshot when nothing is present.
Case represent_case(const ContextSnapshot& snapshot, const std::string& solution, int case_id,
                    const CaseBaseOptions& options = {}, std::optional<EntityRef> user = std::nullopt);

/// CSV `caseid,subj,prop,obj,usedtime`: one row per problem attribute, then
/// one task row per case; cases in id order.
void persist_case_base(const CaseBase& base, std::ostream& out);
void persist_case_base(const CaseBase& base, const std::string& path);

CaseBase load_case_base(std::istream& in, CaseBaseOptions options = {});
CaseBase load_case_base(const std::string& path, CaseBaseOptions options = {});

}  // namespace homectx
