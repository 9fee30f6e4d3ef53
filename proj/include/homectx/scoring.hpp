#pragma once

#include <optional>
#include <span>
#include <vector>

#include "homectx/case_base.hpp"
#include "homectx/similarity.hpp"

namespace homectx {

/// Case scoring kernels. Both produce identical results; the serial loop is
/// the reference and the OpenMP loop splits cases across threads.
///
/// An entry is nullopt when the case is not comparable: it shares no
/// attribute with the observation, or fewer than half of its attributes are
/// observable.
using CaseScores = std::vector<std::optional<double>>;

CaseScores score_cases_serial(std::span<const Case* const> cases, const ObservationIndex& observed,
                              const SimilarityConfig& cfg);

CaseScores score_cases_parallel(std::span<const Case* const> cases, const ObservationIndex& observed,
                                const SimilarityConfig& cfg);

enum class ScoringBackend { Auto, Serial, Parallel };

/// Auto switches to the parallel kernel at this many candidate cases.
inline constexpr std::size_t kParallelScoringCutoff = 512;

CaseScores score_cases(std::span<const Case* const> cases, const ObservationIndex& observed,
                       const SimilarityConfig& cfg, ScoringBackend backend = ScoringBackend::Auto);

/// Threads the parallel kernel would use (1 without OpenMP).
int scoring_threads();

}  // namespace homectx
