#include "homectx/reasoner.hpp"

#include <algorithm>

#include "homectx/error.hpp"

namespace homectx {

namespace {

bool same_problem(const ProblemVector& a, const ProblemVector& b) {
    if (a.size() != b.size()) return false;
    for (const auto& x : a) {
        auto it = std::find_if(b.begin(), b.end(), [&](const CaseAttribute& y) { return y.key == x.key; });
        if (it == b.end() || !(it->value == x.value)) return false;
    }
    return true;
}

}  // namespace

MatchResult rank_cases(const ContextSnapshot& snapshot, const CaseBase& base, const SimilarityConfig& cfg,
                       ScoringBackend backend) {
    MatchResult result;
    result.zone = base.snapshot_zone(snapshot);
    const auto candidates = base.candidates(result.zone);
    if (candidates.empty()) return result;

    const ObservationIndex observed(observation_vector(snapshot));
    const auto scores = score_cases(candidates, observed, cfg, backend);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!scores[i]) continue;
        const Case& c = *candidates[i];
        result.ranking.push_back(RankedCase{c.case_id, c.solution, *scores[i], c.usedtime});
    }
    std::sort(result.ranking.begin(), result.ranking.end(), [](const RankedCase& a, const RankedCase& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.usedtime != b.usedtime) return a.usedtime > b.usedtime;
        return a.case_id < b.case_id;
    });
    result.accepted = !result.ranking.empty() && result.ranking.front().similarity >= cfg.theta;
    return result;
}

MatchResult retrieve_best(const ContextSnapshot& snapshot, CaseBase& base, const SimilarityConfig& cfg,
                          ScoringBackend backend) {
    auto result = rank_cases(snapshot, base, cfg, backend);
    if (result.accepted) base.bump_usedtime(result.ranking.front().case_id);
    return result;
}

int learn_case(const ContextSnapshot& snapshot, const std::string& confirmed, CaseBase& base) {
    Case c = represent_case(snapshot, confirmed, base.next_id(), base.options());
    for (const Case* existing : base.cases())
        if (existing->solution == confirmed && same_problem(existing->problem, c.problem))
            throw Error(ErrorCode::DuplicateExactCase,
                        "case " + std::to_string(existing->case_id) + " already stores this situation");
    const int id = c.case_id;
    base.add(std::move(c));
    return id;
}

}  // namespace homectx
