#include "homectx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "homectx/error.hpp"
#include "homectx/reasoner.hpp"

namespace homectx {

BenchSpec BenchSpec::defaults() {
    BenchSpec s;
    for (int c = 1; c <= 20; ++c) s.cases.push_back(c);
    for (int a = 3; a <= 10; ++a) s.attrs.push_back(a);
    return s;
}

void BenchSpec::validate() const {
    if (cases.empty() || attrs.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs case and attribute counts");
    for (int c : cases)
        if (c <= 0) throw Error(ErrorCode::InvalidArgument, "case counts must be positive");
    for (int a : attrs)
        if (a <= 0) throw Error(ErrorCode::InvalidArgument, "attribute counts must be positive");
    if (repetitions < 2) throw Error(ErrorCode::InvalidArgument, "bench needs at least 2 repetitions");
}

BenchInstance make_bench_instance(int n_cases, int n_attrs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> value(0.0, 100.0);
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    BenchInstance inst;
    const EntityRef user{"User_B"};
    std::vector<SnapshotEntry> entries;
    entries.push_back({"loc", {"loc", user, "User_Locatedin", std::nullopt}, Value::entity("Bedroom_1")});
    for (int a = 0; a < n_attrs; ++a) {
        const std::string subject = "Sensor_" + std::to_string(a);
        AttributeBinding b{"", EntityRef{subject}, "CurrentValue", std::nullopt};
        b.name = attribute_key(b);
        entries.push_back({b.name, b, Value::number(value(rng))});
        inst.config.attributes[b.name] = AttributeSimilarity{AttributeKind::Numeric, 100.0, weight(rng)};
    }
    inst.config.attributes[attribute_key(user, "User_Locatedin")] = AttributeSimilarity{AttributeKind::Categorical, 1.0, 1.0};
    inst.snapshot = ContextSnapshot(std::move(entries));
    for (int c = 1; c <= n_cases; ++c) {
        Case k;
        k.case_id = c;
        k.user = user;
        k.solution = "Task_" + std::to_string(c % 5);
        k.problem.push_back(make_case_attribute(user, "User_Locatedin", Value::entity("Bedroom_1"), false));
        for (int a = 0; a < n_attrs; ++a)
            k.problem.push_back(
                make_case_attribute(EntityRef{"Sensor_" + std::to_string(a)}, "CurrentValue", Value::number(value(rng)), false));
        inst.base.add(std::move(k));
    }
    return inst;
}

std::vector<BenchRow> bench_reasoner(const BenchSpec& spec) {
    spec.validate();
    using clock = std::chrono::steady_clock;
    std::mt19937_64 rng(spec.seed);
    struct Cell {
        int cases, attrs;
        BenchInstance inst;
        long iterations = 1;
        std::vector<double> samples;
    };
    std::vector<Cell> cells;
    for (int attrs : spec.attrs)
        for (int cases : spec.cases) cells.push_back({cases, attrs, make_bench_instance(cases, attrs, rng)});

    volatile double sink = 0;
    auto batch = [&](Cell& c) {
        const auto t0 = clock::now();
        for (long i = 0; i < c.iterations; ++i)
            sink = sink + retrieve_best(c.inst.snapshot, c.inst.base, c.inst.config, ScoringBackend::Serial).ranking.size();
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    for (auto& c : cells)
        while (batch(c) < spec.min_sample_ms && c.iterations < (1L << 24)) c.iterations *= 2;

    // Repetitions sweep the whole grid in a fresh order each time, so a
    // burst of machine noise lands on scattered cells rather than on a run
    // of neighbours.
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    for (int r = 0; r < spec.repetitions; ++r) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) cells[i].samples.push_back(batch(cells[i]) / cells[i].iterations);
    }

    std::vector<BenchRow> rows;
    for (const auto& c : cells) {
        const auto& v = c.samples;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        rows.push_back({c.cases, c.attrs, mean, std::sqrt(ss / (v.size() - 1))});
    }
    std::sort(rows.begin(), rows.end(),
              [](const BenchRow& a, const BenchRow& b) { return std::pair{a.cases, a.attrs} < std::pair{b.cases, b.attrs}; });
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "cases,attrs,mean_ms,stdev_ms\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f\n", r.cases, r.attrs, r.mean_ms, r.stdev_ms);
        out << buf;
    }
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "linear fit needs two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

LinearFit fit_latency(const std::vector<BenchRow>& rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(static_cast<double>(r.cases) * r.attrs);
        y.push_back(r.mean_ms);
    }
    return linear_fit(x, y);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const auto f = linear_fit(rx, ry);
    const double sign = f.slope < 0 ? -1.0 : 1.0;
    return sign * std::sqrt(f.r2);
}

}  // namespace homectx
