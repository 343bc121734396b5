#pragma once
// Dual-layer memory store: experience nodes with quality scores, directed
// weighted inter-experience edges, an entity index linking surfaces to the
// experiences that mention them, and corpus statistics for TF-IDF.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gsem/core.hpp"
#include "gsem/edge_score.hpp"

namespace gsem {

struct EntityNode {
    Entity entity;                           // role = first sighting
    std::set<ExperienceId> linked_experiences;

    bool operator==(const EntityNode&) const = default;
};

struct ExperienceNode {
    Experience experience;
    std::vector<Entity> core_entities;
    std::vector<RoleEdge> role_edges;
    std::optional<std::vector<double>> embedding;  // unit norm when present

    bool operator==(const ExperienceNode&) const = default;
};

using EdgeKey = std::pair<ExperienceId, ExperienceId>;

struct ExperienceEdge {
    ExperienceId src;
    ExperienceId dst;
    double w_prior = 0.0;  // construction-time similarity in [0,1]
    double phi = 0.0;      // feedback accumulator, unclipped
    EdgeScoreBreakdown breakdown;

    bool operator==(const ExperienceEdge&) const = default;
};

// clip(w_prior + phi, 0, 1)
double effective_weight(const ExperienceEdge& edge);

struct CorpusStats {
    std::size_t doc_count = 0;
    std::map<std::string, int> df;  // surface -> number of experiences containing it

    // Counts one more document with the given entity surfaces.
    void add_document(const std::vector<Entity>& core_entities);
};

class MemoryGraph {
public:
    // Validates the node (experience invariants, role-edge endpoints,
    // embedding norm) and keeps the entity index and df counts in sync.
    void add_node(ExperienceNode node);
    void add_edge(ExperienceEdge edge);

    bool has_node(const ExperienceId& id) const { return nodes_.count(id) != 0; }
    const ExperienceNode& node(const ExperienceId& id) const;
    ExperienceNode& node_mut(const ExperienceId& id);
    const ExperienceEdge* find_edge(const ExperienceId& src, const ExperienceId& dst) const;
    ExperienceEdge& edge_mut(const ExperienceId& src, const ExperienceId& dst);

    // All out-edges of id as (neighbor, effective weight), descending
    // weight, lexicographic id tie-break.
    std::vector<std::pair<ExperienceId, double>> neighbors(const ExperienceId& id) const;

    const std::map<ExperienceId, ExperienceNode>& nodes() const { return nodes_; }
    const std::map<EdgeKey, ExperienceEdge>& edges() const { return edges_; }
    const std::map<std::string, EntityNode>& entity_index() const { return entity_index_; }
    const std::map<std::string, int>& entity_df() const { return entity_df_; }
    std::size_t doc_count() const { return nodes_.size(); }

    std::int64_t episode_counter() const { return episode_counter_; }
    void set_episode_counter(std::int64_t v) { episode_counter_ = v; }
    void bump_episode_counter() { ++episode_counter_; }

    CorpusStats corpus_stats() const;

    // Recomputes the entity index / df from scratch and cross-checks the
    // maintained copies; returns violation descriptions (empty = clean).
    std::vector<std::string> check_integrity() const;

    bool operator==(const MemoryGraph&) const = default;

private:
    std::map<ExperienceId, ExperienceNode> nodes_;
    std::map<EdgeKey, ExperienceEdge> edges_;
    std::map<std::string, EntityNode> entity_index_;
    std::map<std::string, int> entity_df_;
    std::int64_t episode_counter_ = 0;
};

inline constexpr int kSnapshotSchemaVersion = 1;

struct GraphSnapshot {
    int schema_version = kSnapshotSchemaVersion;
    std::string payload;  // canonical JSON text
};

GraphSnapshot save_snapshot(const MemoryGraph& g);
MemoryGraph load_snapshot(const GraphSnapshot& snapshot);

// File forms; writing is atomic (temp file + rename).
void save_snapshot_file(const MemoryGraph& g, const std::filesystem::path& path);
MemoryGraph load_snapshot_file(const std::filesystem::path& path);

}  // namespace gsem
