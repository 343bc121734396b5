#pragma once
// Hybrid seed recall (sparse entity BM25 + dense embeddings + linear
// rerank) and round-robin multi-seed traversal under a global step budget.

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsem/graph.hpp"
#include "gsem/providers.hpp"

namespace gsem {

struct RetrievalConfig {
    int k_seed = 5;
    int k_neighbors = 5;
    int t_max = 60;
    double rerank_lambda = 0.5;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    double collect_threshold = 0.5;  // greedy policy only
};

std::vector<std::string> validate(const RetrievalConfig& cfg);

struct Candidate {
    ExperienceId id;
    double sparse_score = 0.0;
    double dense_score = 0.0;
    double rerank_score = 0.0;

    bool operator==(const Candidate&) const = default;
};

enum class ActionKind { Collect, Explore, Backtrack, Stop };

struct Action {
    ActionKind kind = ActionKind::Stop;
    ExperienceId target;  // Explore / Backtrack only
};

// What a policy may see of a candidate: identifier and condition only,
// plus the ranking score and (for backtrack) the ancestor it hangs off.
struct CandidateView {
    ExperienceId id;
    std::string condition;
    double score = 0.0;
    ExperienceId via;
};

struct PolicyView {
    std::string query;
    ExperienceId position;
    std::string position_condition;
    double entry_score = 0.0;  // seed rerank score or the score that reached it
    bool already_collected = false;
    std::vector<CandidateView> forward;
    std::vector<CandidateView> backtrack;
    std::vector<ExperienceId> collected;
};

class ActionPolicy {
public:
    virtual ~ActionPolicy() = default;
    virtual Action choose(const PolicyView& view) = 0;
};

// Collect when the entry score clears the threshold, else explore the top
// forward candidate, else backtrack to the best ancestor candidate, else
// stop. Fully deterministic.
class GreedyPolicy : public ActionPolicy {
public:
    explicit GreedyPolicy(double collect_threshold = 0.5)
        : collect_threshold_(collect_threshold) {}
    Action choose(const PolicyView& view) override;

private:
    double collect_threshold_;
};

// Provider-backed policy; unparseable or illegal replies degrade to the
// greedy action for that step after one retry.
class LlmPolicy : public ActionPolicy {
public:
    LlmPolicy(ChatProvider& provider, double collect_threshold = 0.5)
        : provider_(provider), fallback_(collect_threshold) {}
    Action choose(const PolicyView& view) override;

private:
    ChatProvider& provider_;
    GreedyPolicy fallback_;
};

struct TraceStep {
    ExperienceId position;
    std::vector<CandidateView> forward;
    std::vector<CandidateView> backtrack;
    Action action;
};

struct RetrievalTrace {
    std::string query;
    std::vector<ExperienceId> seeds;
    std::vector<TraceStep> steps;
    std::vector<ExperienceId> collected;  // rank r_i = position in this list
    int steps_used = 0;
};

// Sparse arm. Query entities come from the chat provider; a null or
// failing provider degrades to whitespace/lowercase tokens of the query.
std::vector<Candidate> entity_recall(const MemoryGraph& g, const std::string& query,
                                     ChatProvider* provider, int k, double bm25_k1 = 1.2,
                                     double bm25_b = 0.75);

// Dense arm; every node must carry an embedding.
std::vector<Candidate> embedding_recall(const MemoryGraph& g, const std::string& query,
                                        EmbeddingProvider& embed, int k);

// Union + independent min-max normalization + linear blend; top k_seed.
std::vector<Candidate> rerank(const std::vector<Candidate>& sparse,
                              const std::vector<Candidate>& dense, double lambda, int k_seed);

// Unvisited out-neighbors of position scored (W + Q)/2, top k_n.
std::vector<std::pair<ExperienceId, double>> forward_candidates(
    const MemoryGraph& g, const ExperienceId& position, const std::set<ExperienceId>& visited,
    int k_n);

RetrievalTrace traverse(const MemoryGraph& g, const std::vector<Candidate>& seeds,
                        ActionPolicy& policy, const RetrievalConfig& cfg,
                        const std::string& query = "");

struct RetrievalResult {
    std::vector<Experience> experiences;  // collected, in rank order
    RetrievalTrace trace;
};

RetrievalResult retrieve(const MemoryGraph& g, const std::string& query,
                         const ProviderSet& providers, const RetrievalConfig& cfg,
                         ActionPolicy& policy);

nlohmann::ordered_json trace_to_json(const RetrievalTrace& trace);
RetrievalTrace trace_from_json(const nlohmann::json& j);

}  // namespace gsem
