#include "homectx/scoring.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace homectx {

namespace {

std::optional<double> score_one(const Case& c, const ObservationIndex& observed, const SimilarityConfig& cfg) {
    auto score = score_problem(c.problem, observed, cfg, /*mismatch_is_zero=*/true);
    if (!score || 2 * score->common < c.problem.size()) return std::nullopt;
    return score->similarity;
}

}  // namespace

CaseScores score_cases_serial(std::span<const Case* const> cases, const ObservationIndex& observed,
                              const SimilarityConfig& cfg) {
    CaseScores out(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) out[i] = score_one(*cases[i], observed, cfg);
    return out;
}

CaseScores score_cases_parallel(std::span<const Case* const> cases, const ObservationIndex& observed,
                                const SimilarityConfig& cfg) {
    CaseScores out(cases.size());
    const auto n = static_cast<long long>(cases.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        try {
            out[i] = score_one(*cases[i], observed, cfg);
        } catch (...) {
#pragma omp critical(homectx_scoring_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

CaseScores score_cases(std::span<const Case* const> cases, const ObservationIndex& observed,
                       const SimilarityConfig& cfg, ScoringBackend backend) {
    if (backend == ScoringBackend::Parallel ||
        (backend == ScoringBackend::Auto && cases.size() >= kParallelScoringCutoff && scoring_threads() > 1))
        return score_cases_parallel(cases, observed, cfg);
    return score_cases_serial(cases, observed, cfg);
}

int scoring_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace homectx
