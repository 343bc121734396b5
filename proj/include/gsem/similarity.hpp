#pragma once
// The four edge-weight components and threshold-gated edge construction.

#include <set>
#include <utility>
#include <vector>

#include "gsem/graph.hpp"
#include "gsem/providers.hpp"

namespace gsem {

// Cosine over TF-IDF entity vectors with idf(u) = ln((N+1)/(df(u)+1)) + 1.
// Zero when either vector is all-zero.
double entity_similarity(const ExperienceNode& a, const ExperienceNode& b,
                         const CorpusStats& stats);

// A role path is the label sequence of a simple walk (no repeated entity)
// of exactly k role edges.
using RolePath = std::vector<std::pair<EntityRole, EntityRole>>;

std::set<RolePath> role_paths(const ExperienceNode& node, int k);

// Length-weighted Jaccard over path sets: sum_k (k/10) * J_k, with J_k = 0
// when both sets of length-k paths are empty.
double structure_similarity(const ExperienceNode& a, const ExperienceNode& b);

// LLM-judged joint-use value in [0,1]. Transport errors are retried up to
// retry_count and then rethrown; replies that never parse yield 0.0
// (conservative: no spurious edges) with a logged warning.
double synergy_similarity(const Experience& a, const Experience& b, ChatProvider& judge,
                          int retry_count = 2);

// 1 iff the normalized task types are equal.
int task_similarity(const Experience& a, const Experience& b);

struct BuildEdgesResult {
    int pairs_scored = 0;
    int edges_created = 0;  // directed count
};

// Scores every unordered node pair and inserts both directed edges with
// w_prior = combined wherever combined > theta_edge (strictly). Provider
// failure aborts before any mutation; the error reports partial progress.
BuildEdgesResult build_edges(MemoryGraph& g, const SimilarityWeights& weights,
                             double theta_edge, ChatProvider& judge);

}  // namespace gsem
