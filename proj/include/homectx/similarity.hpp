#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "homectx/task_model.hpp"
#include "homectx/value.hpp"

namespace homectx {

/// Per-attribute scoring parameters. Weights are relative; they are
/// renormalized over the attributes that take part in a comparison.
struct AttributeSimilarity {
    AttributeKind kind = AttributeKind::Categorical;
    double dom = 1.0;
    double weight = 1.0;

    friend bool operator==(const AttributeSimilarity&, const AttributeSimilarity&) = default;
};

struct SimilarityConfig {
    /// Keyed by attribute key ("subject|predicate[|object]").
    std::map<std::string, AttributeSimilarity> attributes;
    /// Used for attributes without an entry.
    AttributeSimilarity fallback{};
    double theta = 0.6;
    std::string location_predicate = "User_Locatedin";

    const AttributeSimilarity& for_key(const std::string& key) const;

    /// Throws InvalidConfig unless theta is in [0,1] and every dom and weight
    /// is positive.
    void validate() const;

    /// Collects kind/dom/weight from the effective conditions of every task.
    /// When two tasks describe the same attribute, the first task (by id)
    /// wins. Attributes without a weight get weight 1.
    static SimilarityConfig from_library(const TaskLibrary& lib, double theta = 0.6);
};

struct LocalScore {
    double sim = 0.0;
    double dis = 1.0;
};

/// Scores one observed value against an expected value.
///
///  numeric      dis = |v - v'| / dom, clamped to [0,1]
///  ratio        sim = v'/dom clamped; with an expected value the score is
///               1 - |v'/dom - v/dom| so a value always matches itself
///  interval     sim = 1 inside [lo,hi], else max(0, 1 - gap/dom); a point
///               expected value acts as [v,v]; an observed range scores its gap
///  categorical  1 on equal symbols, else 0
///  boolean      1 on equal booleans, else 0
///
/// sim + dis == 1 always. Throws KindMismatch when the values do not fit the
/// kind.
LocalScore local_similarity(AttributeKind kind, double dom, const std::optional<Value>& expected, const Value& observed);

LocalScore local_similarity(const AttributeDescriptor& desc, const Value& observed);

/// One attribute of a case problem (or of an observation turned into one).
struct CaseAttribute {
    std::string key;
    EntityRef subject;
    std::string predicate;
    Value value;

    friend bool operator==(const CaseAttribute&, const CaseAttribute&) = default;
};

using ProblemVector = std::vector<CaseAttribute>;

/// Builds a CaseAttribute whose key includes the object for multi-valued
/// predicates.
CaseAttribute make_case_attribute(EntityRef subject, std::string predicate, Value value, bool multi_valued);

/// Present snapshot entries, keyed the same way as case attributes.
ProblemVector observation_vector(const ContextSnapshot& snapshot);

/// Unweighted sum of per-attribute distances. Both vectors must cover the
/// same keys (AttributeSetMismatch otherwise).
double manhattan_distance(const ProblemVector& expected, const ProblemVector& observed, const SimilarityConfig& cfg);

/// Observed values indexed by attribute key. Owns its copy of the vector.
class ObservationIndex {
public:
    explicit ObservationIndex(ProblemVector observed);
    ObservationIndex(const ObservationIndex&) = delete;
    ObservationIndex& operator=(const ObservationIndex&) = delete;
    ObservationIndex(ObservationIndex&&) = default;
    ObservationIndex& operator=(ObservationIndex&&) = default;

    const Value* find(const std::string& key) const;
    std::size_t size() const { return values_.size(); }

private:
    ProblemVector values_;
    std::unordered_map<std::string, const Value*> index_;
};

struct ProblemScore {
    double similarity = 0.0;
    std::size_t common = 0;  // attributes present on both sides
};

/// Core of weighted_similarity. Contributions are summed in key order, so
/// the result does not depend on attribute order. nullopt when no attribute
/// is shared. With `mismatch_is_zero` a KindMismatch scores that attribute
/// as sim 0 instead of throwing.
std::optional<ProblemScore> score_problem(const ProblemVector& expected, const ObservationIndex& observed,
                                          const SimilarityConfig& cfg, bool mismatch_is_zero = false);

/// Weighted similarity S = sum w_j * sim_j over keys present in both
/// vectors, with the weights renormalized to sum to 1 over those keys.
/// Equivalently 1 - sum w_j * dis_j. Throws NoCommonAttributes.
double weighted_similarity(const ProblemVector& expected, const ProblemVector& observed, const SimilarityConfig& cfg);

}  // namespace homectx
