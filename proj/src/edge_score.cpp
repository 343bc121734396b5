#include "gsem/edge_score.hpp"

#include <cmath>

#include "gsem/error.hpp"

namespace gsem {

std::vector<std::string> validate(const SimilarityWeights& w) {
    std::vector<std::string> violations;
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(w.alpha)) violations.push_back("similarity_weights.alpha: out of [0,1]");
    if (!in_unit(w.beta)) violations.push_back("similarity_weights.beta: out of [0,1]");
    if (!in_unit(w.gamma)) violations.push_back("similarity_weights.gamma: out of [0,1]");
    if (!in_unit(w.delta)) violations.push_back("similarity_weights.delta: out of [0,1]");
    if (std::fabs(w.alpha + w.beta + w.gamma + w.delta - 1.0) > 1e-9)
        violations.push_back("similarity_weights: alpha+beta+gamma+delta != 1");
    return violations;
}

EdgeScoreBreakdown initial_edge_weight(double s_entity, double s_structure,
                                       double s_synergy, double s_task,
                                       const SimilarityWeights& w) {
    auto check = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError(std::string("edge score component ") + name + " out of [0,1]");
    };
    check(s_entity, "s_entity");
    check(s_structure, "s_structure");
    check(s_synergy, "s_synergy");
    check(s_task, "s_task");
    if (auto bad = validate(w); !bad.empty()) throw ValidationError(bad.front());

    EdgeScoreBreakdown out;
    out.s_entity = s_entity;
    out.s_structure = s_structure;
    out.s_synergy = s_synergy;
    out.s_task = s_task;
    out.combined =
        w.alpha * s_entity + w.beta * s_structure + w.gamma * s_synergy + w.delta * s_task;
    return out;
}

}  // namespace gsem
