// Serial vs OpenMP case scoring on large random case bases.
// Exit status is non-zero when the two kernels disagree on any score.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

#include "homectx/bench.hpp"
#include "homectx/scoring.hpp"

using namespace homectx;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const int sizes_full[] = {1000, 10000, 100000};
    const int sizes_quick[] = {1000, 5000};
    const int attrs = 10;
    const int reps = quick ? 2 : 5;

    std::printf("threads=%d\n", scoring_threads());
    std::printf("cases,attrs,serial_ms,parallel_ms,speedup,identical\n");
    std::mt19937_64 rng(7);
    bool all_equal = true;
    auto run = [&](int n) {
        auto inst = make_bench_instance(n, attrs, rng);
        const auto cases = inst.base.candidates(std::nullopt);
        const ObservationIndex obs(observation_vector(inst.snapshot));
        CaseScores serial, parallel;
        const double ts = best_of(reps, [&] { serial = score_cases_serial(cases, obs, inst.config); });
        const double tp = best_of(reps, [&] { parallel = score_cases_parallel(cases, obs, inst.config); });
        const bool same = serial == parallel;
        all_equal = all_equal && same;
        std::printf("%d,%d,%.3f,%.3f,%.2f,%s\n", n, attrs, ts, tp, ts / tp, same ? "yes" : "no");
    };
    if (quick)
        for (int n : sizes_quick) run(n);
    else
        for (int n : sizes_full) run(n);
    return all_equal ? 0 : 1;
}
