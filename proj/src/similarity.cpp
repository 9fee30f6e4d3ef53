#include "homectx/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "homectx/error.hpp"

namespace homectx {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Both directions go through the complement twice so that sim == 1 exactly
// when dis == 0 exactly, and vice versa.
LocalScore from_sim(double sim) {
    const double dis = 1.0 - clamp01(sim);
    return {1.0 - dis, dis};
}

LocalScore from_dis(double dis) {
    const double sim = 1.0 - clamp01(dis);
    return {sim, 1.0 - sim};
}

[[noreturn]] void mismatch(AttributeKind kind, const Value& v) {
    throw Error(ErrorCode::KindMismatch,
                std::string(to_string(kind)) + " attribute cannot score a " + std::string(to_string(v.kind())) + " value");
}

double real_or_throw(AttributeKind kind, const Value& v) {
    auto r = v.as_real();
    if (!r) mismatch(kind, v);
    return *r;
}

}  // namespace

const AttributeSimilarity& SimilarityConfig::for_key(const std::string& key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? fallback : it->second;
}

void SimilarityConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "theta must lie in [0,1]");
    auto check = [](const std::string& key, const AttributeSimilarity& a) {
        if (!(a.dom > 0.0) || !(a.weight > 0.0))
            throw Error(ErrorCode::InvalidConfig, "attribute " + key + " needs positive dom and weight");
    };
    check("<fallback>", fallback);
    for (const auto& [k, a] : attributes) check(k, a);
}

SimilarityConfig SimilarityConfig::from_library(const TaskLibrary& lib, double theta) {
    SimilarityConfig cfg;
    cfg.theta = theta;
    for (const Task* t : lib.tasks()) {
        for (const auto& a : lib.effective_condition(t->id).attributes)
            cfg.attributes.emplace(a.key(), AttributeSimilarity{a.kind, a.dom, a.weight.value_or(1.0)});
    }
    cfg.validate();
    return cfg;
}

LocalScore local_similarity(AttributeKind kind, double dom, const std::optional<Value>& expected, const Value& observed) {
    if (!(dom > 0.0)) throw Error(ErrorCode::InvalidConfig, "dom must be positive");
    switch (kind) {
        case AttributeKind::Numeric: {
            const double obs = real_or_throw(kind, observed);
            if (!expected) throw Error(ErrorCode::InvalidConfig, "numeric attribute needs an expected value");
            if (expected->is_interval()) mismatch(kind, *expected);
            const double exp = real_or_throw(kind, *expected);
            return from_dis(std::abs(exp - obs) / dom);
        }
        case AttributeKind::Ratio: {
            if (!observed.is_number()) mismatch(kind, observed);
            const double obs = observed.as_number() / dom;
            if (!expected) return from_sim(obs);
            if (!expected->is_number()) mismatch(kind, *expected);
            return from_dis(std::abs(expected->as_number() / dom - obs));
        }
        case AttributeKind::Interval: {
            if (!expected) throw Error(ErrorCode::InvalidConfig, "interval attribute needs an expected range");
            // Both sides become ranges; a point is [v,v]. A stored case may
            // itself hold a range, which lets it match its own template.
            auto range = [kind](const Value& v) -> std::tuple<double, double, bool> {
                if (v.is_interval()) return {v.as_interval().lo, v.as_interval().hi, v.as_interval().time_of_day};
                const double x = real_or_throw(kind, v);
                return {x, x, v.is_time()};
            };
            const auto [lo, hi, exp_time] = range(*expected);
            const auto [olo, ohi, obs_time] = range(observed);
            if (exp_time != obs_time) mismatch(kind, observed);
            const double gap = std::max({0.0, olo - hi, lo - ohi});
            return from_sim(std::max(0.0, 1.0 - gap / dom));
        }
        case AttributeKind::Categorical: {
            if (!expected) return from_sim(0.0);
            return from_sim(expected->symbol() == observed.symbol() ? 1.0 : 0.0);
        }
        case AttributeKind::Boolean: {
            if (!observed.is_boolean()) mismatch(kind, observed);
            if (!expected) return from_sim(0.0);
            if (!expected->is_boolean()) mismatch(kind, *expected);
            return from_sim(expected->as_boolean() == observed.as_boolean() ? 1.0 : 0.0);
        }
    }
    return from_sim(0.0);
}

LocalScore local_similarity(const AttributeDescriptor& desc, const Value& observed) {
    return local_similarity(desc.kind, desc.dom, desc.expected, observed);
}

CaseAttribute make_case_attribute(EntityRef subject, std::string predicate, Value value, bool multi_valued) {
    CaseAttribute a;
    a.key = attribute_key(subject, predicate, multi_valued ? std::optional<Value>(value) : std::nullopt);
    a.subject = std::move(subject);
    a.predicate = std::move(predicate);
    a.value = std::move(value);
    return a;
}

ProblemVector observation_vector(const ContextSnapshot& snapshot) {
    ProblemVector out;
    for (const auto& e : snapshot.entries()) {
        if (!e.value) continue;
        out.push_back(CaseAttribute{attribute_key(e.binding), e.binding.subject, e.binding.predicate, *e.value});
    }
    return out;
}

double manhattan_distance(const ProblemVector& expected, const ProblemVector& observed, const SimilarityConfig& cfg) {
    std::unordered_map<std::string, const Value*> obs;
    for (const auto& a : observed) obs.emplace(a.key, &a.value);
    std::set<std::string> keys;
    for (const auto& a : expected) keys.insert(a.key);
    if (keys.size() != obs.size()) throw Error(ErrorCode::AttributeSetMismatch, "vectors cover different attributes");
    double total = 0.0;
    for (const auto& a : expected) {
        auto it = obs.find(a.key);
        if (it == obs.end()) throw Error(ErrorCode::AttributeSetMismatch, "observation lacks " + a.key);
        const auto& s = cfg.for_key(a.key);
        total += local_similarity(s.kind, s.dom, a.value, *it->second).dis;
    }
    return total;
}

ObservationIndex::ObservationIndex(ProblemVector observed) : values_(std::move(observed)) {
    index_.reserve(values_.size());
    for (const auto& a : values_) index_.emplace(a.key, &a.value);
}

const Value* ObservationIndex::find(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : it->second;
}

std::optional<ProblemScore> score_problem(const ProblemVector& expected, const ObservationIndex& observed,
                                          const SimilarityConfig& cfg, bool mismatch_is_zero) {
    struct Term {
        const std::string* key;
        double weight;
        double sim;
    };
    std::vector<Term> terms;
    terms.reserve(expected.size());
    for (const auto& a : expected) {
        const Value* v = observed.find(a.key);
        if (!v) continue;
        const auto& s = cfg.for_key(a.key);
        double sim = 0.0;
        try {
            sim = local_similarity(s.kind, s.dom, a.value, *v).sim;
        } catch (const Error& e) {
            if (!mismatch_is_zero || e.code() != ErrorCode::KindMismatch) throw;
        }
        terms.push_back({&a.key, s.weight, sim});
    }
    if (terms.empty()) return std::nullopt;
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return *x.key < *y.key; });
    double weight_sum = 0.0;
    double score = 0.0;
    for (const auto& t : terms) {
        weight_sum += t.weight;
        score += t.weight * t.sim;
    }
    return ProblemScore{std::clamp(score / weight_sum, 0.0, 1.0), terms.size()};
}

double weighted_similarity(const ProblemVector& expected, const ProblemVector& observed, const SimilarityConfig& cfg) {
    auto score = score_problem(expected, ObservationIndex(observed), cfg);
    if (!score) throw Error(ErrorCode::NoCommonAttributes, "no attribute present in both vectors");
    return score->similarity;
}

}  // namespace homectx
