#include "gsem/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/log.hpp"
#include "gsem/prompts.hpp"

namespace gsem {

double entity_similarity(const ExperienceNode& a, const ExperienceNode& b,
                         const CorpusStats& stats) {
    auto term_frequencies = [](const ExperienceNode& n) {
        std::map<std::string, int> tf;
        for (const auto& e : n.core_entities) ++tf[e.surface];
        return tf;
    };
    auto idf = [&](const std::string& surface) {
        auto it = stats.df.find(surface);
        int df = it == stats.df.end() ? 0 : it->second;
        return std::log((static_cast<double>(stats.doc_count) + 1.0) / (df + 1.0)) + 1.0;
    };

    std::map<std::string, int> tf_a = term_frequencies(a);
    std::map<std::string, int> tf_b = term_frequencies(b);

    double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (const auto& [surface, tf] : tf_a) {
        double x = tf * idf(surface);
        norm_a += x * x;
        auto it = tf_b.find(surface);
        if (it != tf_b.end()) dot += x * (it->second * idf(surface));
    }
    for (const auto& [surface, tf] : tf_b) {
        double x = tf * idf(surface);
        norm_b += x * x;
    }
    if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::set<RolePath> role_paths(const ExperienceNode& node, int k) {
    if (k < 1) throw ValidationError("role path length must be >= 1");
    std::set<RolePath> paths;
    if (node.role_edges.empty()) return paths;

    // Adjacency over entities; walks may not revisit a vertex.
    std::map<Entity, std::vector<const RoleEdge*>> out_edges;
    for (const auto& edge : node.role_edges) out_edges[edge.from].push_back(&edge);

    RolePath labels;
    std::vector<Entity> visited;
    auto dfs = [&](auto&& self, const Entity& at, int remaining) -> void {
        if (remaining == 0) {
            paths.insert(labels);
            return;
        }
        auto it = out_edges.find(at);
        if (it == out_edges.end()) return;
        for (const RoleEdge* edge : it->second) {
            if (std::find(visited.begin(), visited.end(), edge->to) != visited.end()) continue;
            visited.push_back(edge->to);
            labels.emplace_back(edge->from.role, edge->to.role);
            self(self, edge->to, remaining - 1);
            labels.pop_back();
            visited.pop_back();
        }
    };
    std::set<Entity> starts;
    for (const auto& edge : node.role_edges) starts.insert(edge.from);
    for (const auto& start : starts) {
        visited.assign(1, start);
        dfs(dfs, start, k);
    }
    return paths;
}

double structure_similarity(const ExperienceNode& a, const ExperienceNode& b) {
    double total = 0.0;
    for (int k = 1; k <= 4; ++k) {
        std::set<RolePath> pa = role_paths(a, k);
        std::set<RolePath> pb = role_paths(b, k);
        if (pa.empty() && pb.empty()) continue;  // J_k = 0 by convention
        std::size_t intersection = 0;
        for (const auto& p : pa) intersection += pb.count(p);
        std::size_t unions = pa.size() + pb.size() - intersection;
        total += (k / 10.0) * (static_cast<double>(intersection) / unions);
    }
    return total;
}

double synergy_similarity(const Experience& a, const Experience& b, ChatProvider& judge,
                          int retry_count) {
    ChatRequest request;
    request.system = prompts::kSimilaritySystem;
    request.user = prompts::render(prompts::kSimilarityHuman, {{"condition_a", a.condition},
                                                               {"content_a", a.content},
                                                               {"condition_b", b.condition},
                                                               {"content_b", b.content}});
    request.temperature = 0.0;

    for (int attempt = 0; attempt <= retry_count; ++attempt) {
        ChatResponse response;
        try {
            response = judge.chat(request);
        } catch (const ProviderError&) {
            if (attempt == retry_count) throw;
            continue;
        }
        auto parsed = parse_json_lenient(response.text);
        if (parsed && parsed->is_object() && parsed->contains("similarity") &&
            (*parsed)["similarity"].is_number()) {
            return std::clamp((*parsed)["similarity"].get<double>(), 0.0, 1.0);
        }
    }
    log_warn("synergy judge reply never parsed; falling back to similarity 0.0 for pair " +
             a.id.value + " / " + b.id.value);
    return 0.0;
}

int task_similarity(const Experience& a, const Experience& b) {
    return normalize_task_type(a.task_type) == normalize_task_type(b.task_type) ? 1 : 0;
}

BuildEdgesResult build_edges(MemoryGraph& g, const SimilarityWeights& weights,
                             double theta_edge, ChatProvider& judge) {
    if (g.nodes().size() < 2)
        throw ValidationError("build_edges requires at least 2 nodes, have " +
                              std::to_string(g.nodes().size()));
    if (auto bad = validate(weights); !bad.empty()) throw ValidationError(bad.front());

    const CorpusStats stats = g.corpus_stats();
    std::vector<ExperienceId> ids;
    ids.reserve(g.nodes().size());
    for (const auto& [id, _] : g.nodes()) ids.push_back(id);

    const std::size_t total_pairs = ids.size() * (ids.size() - 1) / 2;
    BuildEdgesResult result;
    std::vector<ExperienceEdge> pending;

    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const ExperienceNode& a = g.node(ids[i]);
            const ExperienceNode& b = g.node(ids[j]);
            double s_entity = entity_similarity(a, b, stats);
            double s_structure = structure_similarity(a, b);
            double s_task = task_similarity(a.experience, b.experience);
            double s_synergy;
            try {
                // Symmetric by intent: one judge call per unordered pair.
                s_synergy = synergy_similarity(a.experience, b.experience, judge);
            } catch (const ProviderError& e) {
                throw ProviderError("edge build aborted after " +
                                    std::to_string(result.pairs_scored) + " of " +
                                    std::to_string(total_pairs) + " pairs: " + e.what());
            }
            EdgeScoreBreakdown breakdown =
                initial_edge_weight(s_entity, s_structure, s_synergy, s_task, weights);
            ++result.pairs_scored;
            if (breakdown.combined > theta_edge) {
                pending.push_back(
                    ExperienceEdge{ids[i], ids[j], breakdown.combined, 0.0, breakdown});
                pending.push_back(
                    ExperienceEdge{ids[j], ids[i], breakdown.combined, 0.0, breakdown});
            }
        }
    }
    for (auto& edge : pending) {
        g.add_edge(std::move(edge));
        ++result.edges_created;
    }
    return result;
}

}  // namespace gsem
