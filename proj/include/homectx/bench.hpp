#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "homectx/case_base.hpp"
#include "homectx/context_store.hpp"
#include "homectx/similarity.hpp"

namespace homectx {

struct BenchSpec {
    std::vector<int> cases;   // default 1..20
    std::vector<int> attrs;   // default 3..10
    int repetitions = 7;
    std::uint64_t seed = 42;
    /// Each timed sample batches calls until it lasts at least this long.
    double min_sample_ms = 1.0;

    static BenchSpec defaults();
    void validate() const;
};

struct BenchRow {
    int cases = 0;
    int attrs = 0;
    double mean_ms = 0.0;
    double stdev_ms = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Random reasoning workload: `n_cases` located cases with `n_attrs`
/// numeric attributes each, and an observation covering all of them.
struct BenchInstance {
    CaseBase base;
    ContextSnapshot snapshot;
    SimilarityConfig config;
};

BenchInstance make_bench_instance(int n_cases, int n_attrs, std::mt19937_64& rng);

/// Mean and sample standard deviation of retrieve_best latency per cell.
std::vector<BenchRow> bench_reasoner(const BenchSpec& spec);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Least squares of mean latency against cases*attrs.
LinearFit fit_latency(const std::vector<BenchRow>& rows);
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace homectx
