#pragma once
// Memory construction from historical cases: trajectory sampling,
// indication/contraindication extraction, deduplication, entity parsing,
// reliability validation (quality init), and graph assembly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsem/core.hpp"
#include "gsem/edge_score.hpp"
#include "gsem/graph.hpp"
#include "gsem/providers.hpp"

namespace gsem {

struct ConstructionConfig {
    int n_traj = 5;
    int n_erv = 5;
    double dedup_threshold = 0.95;
    double theta_edge = 0.35;
    SimilarityWeights similarity_weights;
};

std::vector<std::string> validate(const ConstructionConfig& cfg);

struct ErvResult {
    ExperienceId experience_id;
    int successes = 0;
    int trials = 0;
    double accuracy = 0.0;
    double q0 = 0.5;
};

struct DivergenceReport {
    int divergence_step = 0;  // 1-based step in the failed trajectory
    std::string success_decision;
    std::string failure_decision;
    std::string why_fatal;
    std::string consequence;
};

// The text a node is embedded and deduplicated by.
std::string node_text(const Experience& e);

// "Relevant experience:" block prepended to prompts; one line per
// experience, empty string for an empty set.
std::string render_injection(std::span<const Experience> experiences);

// Normalized exact match first; single-token golds never consult the
// judge; otherwise the judge answers YES/NO.
bool answers_match(const std::string& answer, const std::string& gold, ChatProvider* judge);

// Parses a numbered-steps reply ending in "FINAL ANSWER: ...".
Trajectory parse_trajectory_reply(const std::string& case_id, const std::string& reply);

std::vector<Trajectory> sample_trajectories(const CaseRecord& record, ChatProvider& provider,
                                            int n, std::uint64_t seed_base = 0);

std::vector<Experience> extract_indications(const CaseRecord& record,
                                            const std::vector<Trajectory>& successes,
                                            ChatProvider& provider);

DivergenceReport analyze_divergence(const Trajectory& success, const Trajectory& failure,
                                    const std::string& gold, ChatProvider& provider);

Trajectory pair_failure_with_success(const Trajectory& failure,
                                     const std::vector<Trajectory>& successes,
                                     EmbeddingProvider& embed);

Experience extract_contraindication(const CaseRecord& record, const DivergenceReport& divergence,
                                    const Trajectory& failure, const Trajectory& success,
                                    ChatProvider& provider);

// Greedy in input order: drop an experience iff its embedding cosine
// against any kept one reaches the threshold and the polarity matches.
std::vector<Experience> deduplicate(const std::vector<Experience>& experiences,
                                    EmbeddingProvider& embed, double threshold);

// Q0 = sigmoid(successes/n_erv - ceil(n_erv/2)/n_erv)
ErvResult erv_quality(int successes, int n_erv);

ErvResult run_erv(const Experience& e, std::span<const CaseRecord> held_out,
                  ChatProvider& provider, int n_erv);

struct ParsedStructure {
    std::vector<Entity> entities;
    std::vector<RoleEdge> role_edges;
    std::vector<std::string> warnings;  // dropped entities/edges
};

ParsedStructure parse_entities_and_edges(const Experience& e, ChatProvider& provider);

struct BuildReport {
    int cases_processed = 0;
    int indications = 0;
    int contraindications = 0;
    int dropped_duplicates = 0;
    int nodes = 0;
    int edges = 0;  // directed
    double mean_q = 0.0;
    std::vector<std::string> skipped_cases;
    std::vector<std::string> warnings;
};

struct BuildResult {
    MemoryGraph graph;
    BuildReport report;
};

BuildResult build_memory(std::vector<CaseRecord> cases, const ProviderSet& providers,
                         const ConstructionConfig& cfg, std::uint64_t master_seed = 0);

// Dataset file: JSON array of case records.
std::vector<CaseRecord> load_cases(const std::filesystem::path& path);

}  // namespace gsem
