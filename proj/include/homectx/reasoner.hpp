#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homectx/case_base.hpp"
#include "homectx/scoring.hpp"
#include "homectx/similarity.hpp"

namespace homectx {

struct RankedCase {
    int case_id = 0;
    std::string solution;
    double similarity = 0.0;
    std::uint64_t usedtime = 0;
};

struct MatchResult {
    /// Descending similarity; ties by higher usedtime, then lower case id.
    std::vector<RankedCase> ranking;
    bool accepted = false;
    std::optional<std::string> zone;

    const RankedCase* best() const { return ranking.empty() ? nullptr : &ranking.front(); }
};

/// Scores the candidate partition (the snapshot's zone plus unlocated cases,
/// or everything when the snapshot has no location) without touching the
/// base.
MatchResult rank_cases(const ContextSnapshot& snapshot, const CaseBase& base, const SimilarityConfig& cfg,
                       ScoringBackend backend = ScoringBackend::Auto);

/// rank_cases, then bumps the winner's usedtime when it is accepted
/// (top similarity >= theta).
MatchResult retrieve_best(const ContextSnapshot& snapshot, CaseBase& base, const SimilarityConfig& cfg,
                          ScoringBackend backend = ScoringBackend::Auto);

/// Stores the snapshot as a new case with id max+1 and returns the id.
/// Throws DuplicateExactCase when an identical problem with the same
/// solution is already stored.
int learn_case(const ContextSnapshot& snapshot, const std::string& confirmed, CaseBase& base);

}  // namespace homectx
