#pragma once
// Four-component inter-experience edge score and its convex combination.

#include <string>
#include <vector>

namespace gsem {

struct SimilarityWeights {
    double alpha = 0.25;  // entity overlap
    double beta = 0.25;   // reasoning structure
    double gamma = 0.25;  // joint-use synergy
    double delta = 0.25;  // task-type consistency

    bool operator==(const SimilarityWeights&) const = default;
};

// Empty result means valid; entries name the violated rule.
std::vector<std::string> validate(const SimilarityWeights& w);

struct EdgeScoreBreakdown {
    double s_entity = 0.0;
    double s_structure = 0.0;
    double s_synergy = 0.0;
    double s_task = 0.0;
    double combined = 0.0;

    bool operator==(const EdgeScoreBreakdown&) const = default;
};

// combined = alpha*s_entity + beta*s_structure + gamma*s_synergy + delta*s_task.
// Throws ValidationError when a component is outside [0,1].
EdgeScoreBreakdown initial_edge_weight(double s_entity, double s_structure,
                                       double s_synergy, double s_task,
                                       const SimilarityWeights& w);

}  // namespace gsem
