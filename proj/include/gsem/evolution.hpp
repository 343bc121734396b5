#pragma once
// Online calibration: rank-decayed node credits, pair edge credits, and
// clipped quality/weight updates driven by task feedback. Also inserts
// newly extracted experiences with construction-time relation scoring.

#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "gsem/graph.hpp"
#include "gsem/providers.hpp"
#include "gsem/retrieval.hpp"

namespace gsem {

struct EvolutionConfig {
    double eta_q = 0.1;
    double eta_w = 0.05;
    double rho = 0.8;
    // When set, the stored edge weight itself follows
    // W <- clip(W + phi_new) each event instead of staying a fixed prior.
    bool literal_w_recurrence = false;
};

std::vector<std::string> validate(const EvolutionConfig& cfg);

struct FeedbackEvent {
    std::string task_id;
    double delta = 0.0;  // in [-1,1]
    RetrievalTrace trace;
};

struct CreditAssignment {
    std::map<ExperienceId, double> node_credits;
    std::map<EdgeKey, double> edge_credits;
};

// a_i = rho^{r_i} / sum_j rho^{r_j}; ranks are 0-based and distinct.
std::map<ExperienceId, double> node_credits(const std::map<ExperienceId, int>& ranks, double rho);

// b_ij = a_i * a_j / sum over induced edges of a_k * a_l; empty induced
// set yields an empty map.
std::map<EdgeKey, double> edge_credits(const std::map<ExperienceId, double>& credits,
                                       const std::set<EdgeKey>& induced_edges);

struct NodeUpdate {
    ExperienceId id;
    double q_before = 0.0;
    double q_after = 0.0;
    double credit = 0.0;
};

struct EdgeUpdate {
    EdgeKey key;
    double phi_before = 0.0;
    double phi_after = 0.0;
    double credit = 0.0;
};

struct UpdateReport {
    std::string task_id;
    double delta = 0.0;
    std::vector<NodeUpdate> node_updates;  // sorted by id
    std::vector<EdgeUpdate> edge_updates;  // sorted by (src,dst)
};

// All-or-nothing: the graph is untouched if any collected id is unknown.
// Only collected nodes and the edges they induce change.
UpdateReport apply_feedback(MemoryGraph& g, const FeedbackEvent& event,
                            const EvolutionConfig& cfg);

// Parses entities, embeds, and connects the new node against the same
// edge threshold, with corpus statistics already counting the newcomer.
// Commits atomically after all provider calls succeed.
void insert_experience(MemoryGraph& g, const Experience& e, double q0,
                       const ProviderSet& providers, const SimilarityWeights& weights,
                       double theta_edge);

double delta_from_outcome(bool correct);

nlohmann::ordered_json report_to_json(const UpdateReport& report);

}  // namespace gsem
