#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "homectx/case_base.hpp"
#include "homectx/reasoner.hpp"
#include "homectx/similarity.hpp"

namespace oracle {

using namespace homectx;

struct RetrievalInstance {
    CaseBase base;
    ContextSnapshot snapshot;
    SimilarityConfig cfg;
};

inline std::string room_zone(const std::string& room) {
    const auto us = room.rfind('_');
    if (us == std::string::npos || us + 1 == room.size()) return room;
    for (std::size_t i = us + 1; i < room.size(); ++i)
        if (room[i] < '0' || room[i] > '9') return room;
    return room.substr(0, us);
}

// Values are coarse so that exact score ties (and the usedtime/id tie rule)
// come up often.
inline RetrievalInstance random_retrieval(std::mt19937_64& rng, int max_cases = 50, int max_attrs = 10) {
    static const std::vector<std::string> rooms{"Bedroom_1", "Bedroom_2", "Kitchen_1", "BathRoom_3", "LivingRoom"};
    static const std::vector<std::string> states{"On", "Off", "Standby"};
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    RetrievalInstance inst;
    const EntityRef user{"User_B"};
    const int n_attrs = 1 + pick(max_attrs);
    std::vector<bool> numeric(n_attrs);
    for (int a = 0; a < n_attrs; ++a) {
        numeric[a] = pick(2) == 0;
        const auto key = attribute_key(EntityRef{"Dev_" + std::to_string(a)}, "Reading");
        inst.cfg.attributes[key] = AttributeSimilarity{numeric[a] ? AttributeKind::Numeric : AttributeKind::Categorical,
                                                       numeric[a] ? 50.0 : 1.0, 0.1 * (1 + pick(10))};
    }
    inst.cfg.attributes[attribute_key(user, "User_Locatedin")] = AttributeSimilarity{AttributeKind::Categorical, 1.0, 0.5};
    inst.cfg.theta = 0.1 * pick(11);

    auto value_for = [&](int a) {
        return numeric[a] ? Value::number(10.0 * pick(6)) : Value::entity(states[pick(3)]);
    };

    std::vector<SnapshotEntry> entries;
    if (pick(4) != 0) {
        AttributeBinding b{"loc", user, "User_Locatedin", std::nullopt};
        entries.push_back({"loc", b, Value::entity(rooms[pick(5)])});
    }
    for (int a = 0; a < n_attrs; ++a) {
        if (pick(5) == 0) continue;  // unobserved
        AttributeBinding b{"a" + std::to_string(a), EntityRef{"Dev_" + std::to_string(a)}, "Reading", std::nullopt};
        entries.push_back({b.name, b, value_for(a)});
    }
    inst.snapshot = ContextSnapshot(std::move(entries));

    const int n_cases = pick(max_cases + 1);
    for (int c = 1; c <= n_cases; ++c) {
        Case k;
        k.case_id = c * 3 + pick(3);  // sparse ids
        if (inst.base.find(k.case_id)) continue;
        k.user = user;
        k.solution = "Task_" + std::to_string(pick(6));
        k.usedtime = static_cast<std::uint64_t>(pick(3));
        if (pick(5) != 0) k.problem.push_back(make_case_attribute(user, "User_Locatedin", Value::entity(rooms[pick(5)]), false));
        for (int a = 0; a < n_attrs; ++a)
            if (pick(4) != 0)
                k.problem.push_back(make_case_attribute(EntityRef{"Dev_" + std::to_string(a)}, "Reading", value_for(a), false));
        if (k.problem.empty()) k.problem.push_back(make_case_attribute(user, "User_Locatedin", Value::entity(rooms[0]), false));
        inst.base.add(std::move(k));
    }
    return inst;
}

struct OracleBest {
    int case_id = 0;
    double similarity = 0.0;
};

// Exhaustive scan: every case of every partition, filtered by zone here
// rather than through the base's partitions.
inline std::optional<OracleBest> linear_scan(const RetrievalInstance& inst) {
    std::map<std::string, Value> observed;
    std::optional<std::string> zone;
    for (const auto& e : inst.snapshot.entries()) {
        if (!e.value) continue;
        observed.emplace(attribute_key(e.binding), *e.value);
        if (e.binding.predicate == "User_Locatedin") zone = room_zone(e.value->symbol());
    }
    std::optional<OracleBest> best;
    std::uint64_t best_used = 0;
    for (const Case* c : inst.base.cases()) {
        std::optional<std::string> case_zone;
        for (const auto& a : c->problem)
            if (a.predicate == "User_Locatedin") case_zone = room_zone(a.value.symbol());
        if (zone && case_zone && *case_zone != *zone) continue;

        std::map<std::string, const CaseAttribute*> sorted;
        for (const auto& a : c->problem) sorted.emplace(a.key, &a);
        double wsum = 0.0, acc = 0.0;
        std::size_t common = 0;
        for (const auto& [key, a] : sorted) {
            auto it = observed.find(key);
            if (it == observed.end()) continue;
            const auto& cfg = inst.cfg.attributes.at(key);
            double sim;
            if (cfg.kind == AttributeKind::Numeric)
                sim = 1.0 - std::min(1.0, std::abs(a->value.as_number() - it->second.as_number()) / cfg.dom);
            else
                sim = a->value.symbol() == it->second.symbol() ? 1.0 : 0.0;
            wsum += cfg.weight;
            acc += cfg.weight * sim;
            ++common;
        }
        if (common == 0 || 2 * common < c->problem.size()) continue;
        const double s = acc / wsum;
        const bool better = !best || s > best->similarity ||
                            (s == best->similarity && (c->usedtime > best_used ||
                                                        (c->usedtime == best_used && c->case_id < best->case_id)));
        if (better) {
            best = OracleBest{c->case_id, s};
            best_used = c->usedtime;
        }
    }
    return best;
}

// One random trial of the similarity properties. Returns an empty string on
// success, otherwise which property broke.
inline std::string similarity_property_trial(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    const int k = 1 + pick(10);
    SimilarityConfig cfg;
    ProblemVector expected, observed;
    std::vector<AttributeKind> kinds;
    std::vector<double> doms;

    auto make_value = [&](AttributeKind kind, double dom, bool is_expected) -> Value {
        switch (kind) {
            case AttributeKind::Numeric: return Value::number(100.0 * unit(rng));
            case AttributeKind::Ratio: return Value::number(dom * unit(rng) * (pick(8) == 0 ? 1.3 : 1.0));
            case AttributeKind::Interval: {
                if (!is_expected) return Value::time_of_day(pick(24 * 60));
                const int lo = pick(20 * 60);
                return Value::time_interval(lo, lo + pick(180));
            }
            case AttributeKind::Categorical: return Value::entity("S" + std::to_string(pick(3)));
            case AttributeKind::Boolean: return Value::boolean(pick(2) == 0);
        }
        return Value::boolean(false);
    };

    for (int j = 0; j < k; ++j) {
        const auto kind = static_cast<AttributeKind>(pick(5));
        const double dom = kind == AttributeKind::Categorical || kind == AttributeKind::Boolean ? 1.0 : 1.0 + 179.0 * unit(rng);
        const EntityRef subj{"E" + std::to_string(j)};
        cfg.attributes[attribute_key(subj, "P")] = AttributeSimilarity{kind, dom, 0.01 + unit(rng)};
        expected.push_back(make_case_attribute(subj, "P", make_value(kind, dom, true), false));
        // Sometimes reuse the expected value so perfect matches occur.
        Value obs = make_value(kind, dom, false);
        if (pick(3) == 0) {
            if (kind == AttributeKind::Interval)
                obs = Value::time_of_day(static_cast<int>(expected.back().value.as_interval().lo));
            else
                obs = expected.back().value;
        }
        observed.push_back(make_case_attribute(subj, "P", obs, false));
        kinds.push_back(kind);
        doms.push_back(dom);
    }

    bool all_zero = true;
    std::vector<double> dis(k);
    for (int j = 0; j < k; ++j) {
        const auto ls = local_similarity(kinds[j], doms[j], expected[j].value, observed[j].value);
        if (std::abs(ls.sim + ls.dis - 1.0) > 1e-12) return "sim+dis != 1";
        if (ls.sim < 0 || ls.sim > 1 || ls.dis < 0 || ls.dis > 1) return "local score out of [0,1]";
        dis[j] = ls.dis;
        all_zero = all_zero && ls.dis == 0.0;
    }
    const double s = weighted_similarity(expected, observed, cfg);
    if (s < 0.0 || s > 1.0) return "S out of [0,1]";
    if ((std::abs(s - 1.0) <= 1e-12) != all_zero) return "S=1 iff all dis=0";

    auto e2 = expected, o2 = observed;
    std::vector<std::size_t> perm(k);
    for (int j = 0; j < k; ++j) perm[j] = static_cast<std::size_t>(j);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < k; ++j) {
        e2[j] = expected[perm[j]];
        o2[j] = observed[perm[j]];
    }
    if (weighted_similarity(e2, o2, cfg) != s) return "reorder changed S";

    // Worsen one attribute; S must not increase.
    const int j = pick(k);
    auto worse = observed;
    const auto& exp = expected[j].value;
    switch (kinds[j]) {
        case AttributeKind::Numeric:
        case AttributeKind::Ratio: {
            const double e = exp.as_number(), o = observed[j].value.as_number();
            const double step = doms[j] * unit(rng);
            worse[j].value = Value::number(o >= e ? o + step : o - step);
            break;
        }
        case AttributeKind::Interval: {
            const auto& iv = exp.as_interval();
            const int o = observed[j].value.as_minutes();
            const int step = pick(120);
            const int moved = o >= iv.lo ? std::max<int>(o, static_cast<int>(iv.hi)) + step : o - step;
            worse[j].value = Value::time_of_day(std::clamp(moved, 0, 1439));
            break;
        }
        case AttributeKind::Categorical: worse[j].value = Value::entity("Other"); break;
        case AttributeKind::Boolean: worse[j].value = Value::boolean(!exp.as_boolean()); break;
    }
    const auto lw = local_similarity(kinds[j], doms[j], exp, worse[j].value);
    if (lw.dis + 1e-12 < dis[j]) return "worsening step did not worsen";
    if (weighted_similarity(expected, worse, cfg) > s + 1e-12) return "S increased when one dis worsened";

    // Uniform weights reduce S to the mean of the sims.
    SimilarityConfig uniform = cfg;
    for (auto& [key, a] : uniform.attributes) a.weight = 1.0;
    double mean = 0.0;
    for (double d : dis) mean += 1.0 - d;
    mean /= k;
    if (std::abs(weighted_similarity(expected, observed, uniform) - mean) > 1e-12) return "uniform weights != mean";
    return {};
}

}  // namespace oracle
