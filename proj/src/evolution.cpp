#include "gsem/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "gsem/construction.hpp"
#include "gsem/error.hpp"
#include "gsem/similarity.hpp"

namespace gsem {

std::vector<std::string> validate(const EvolutionConfig& cfg) {
    std::vector<std::string> violations;
    if (!(cfg.eta_q > 0.0)) violations.push_back("evolution.eta_q must be > 0");
    if (!(cfg.eta_w > 0.0)) violations.push_back("evolution.eta_w must be > 0");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) violations.push_back("evolution.rho must be in (0,1)");
    return violations;
}

std::map<ExperienceId, double> node_credits(const std::map<ExperienceId, int>& ranks,
                                            double rho) {
    if (ranks.empty()) throw ValidationError("node_credits: empty rank map");
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("node_credits: rho must be in (0,1)");
    std::set<int> seen;
    for (const auto& [id, r] : ranks) {
        if (r < 0) throw ValidationError("node_credits: negative rank for " + id.value);
        if (!seen.insert(r).second)
            throw ValidationError("node_credits: duplicate rank " + std::to_string(r));
    }
    double denom = 0.0;
    for (const auto& [id, r] : ranks) denom += std::pow(rho, r);
    std::map<ExperienceId, double> credits;
    for (const auto& [id, r] : ranks) credits[id] = std::pow(rho, r) / denom;
    return credits;
}

std::map<EdgeKey, double> edge_credits(const std::map<ExperienceId, double>& credits,
                                       const std::set<EdgeKey>& induced_edges) {
    std::map<EdgeKey, double> out;
    if (induced_edges.empty()) return out;
    double denom = 0.0;
    for (const auto& key : induced_edges) {
        auto i = credits.find(key.first);
        auto j = credits.find(key.second);
        if (i == credits.end() || j == credits.end())
            throw ValidationError("edge_credits: endpoint without node credit: " +
                                  key.first.value + " -> " + key.second.value);
        denom += i->second * j->second;
    }
    for (const auto& key : induced_edges)
        out[key] = credits.at(key.first) * credits.at(key.second) / denom;
    return out;
}

UpdateReport apply_feedback(MemoryGraph& g, const FeedbackEvent& event,
                            const EvolutionConfig& cfg) {
    if (auto bad = validate(cfg); !bad.empty()) throw ValidationError(bad.front());
    if (!(event.delta >= -1.0 && event.delta <= 1.0))
        throw ValidationError("feedback delta out of [-1,1]");

    UpdateReport report;
    report.task_id = event.task_id;
    report.delta = event.delta;

    const std::vector<ExperienceId>& activated = event.trace.collected;
    if (activated.empty()) {
        g.bump_episode_counter();
        return report;  // empty activated set: nothing to credit
    }
    // Validate everything before touching the graph.
    std::map<ExperienceId, int> ranks;
    for (std::size_t r = 0; r < activated.size(); ++r) {
        if (!g.has_node(activated[r]))
            throw ValidationError("apply_feedback: unknown collected id " + activated[r].value);
        if (!ranks.emplace(activated[r], static_cast<int>(r)).second)
            throw ValidationError("apply_feedback: duplicate collected id " + activated[r].value);
    }

    std::map<ExperienceId, double> credits = node_credits(ranks, cfg.rho);
    std::set<EdgeKey> induced;
    for (const auto& [i, ri] : ranks) {
        for (const auto& [j, rj] : ranks) {
            if (i == j) continue;
            if (g.find_edge(i, j)) induced.insert(EdgeKey{i, j});
        }
    }
    std::map<EdgeKey, double> b = edge_credits(credits, induced);

    for (const auto& [id, a] : credits) {
        ExperienceNode& node = g.node_mut(id);
        NodeUpdate update;
        update.id = id;
        update.credit = a;
        update.q_before = node.experience.quality;
        node.experience.quality =
            std::clamp(update.q_before + cfg.eta_q * a * event.delta, 0.0, 1.0);
        update.q_after = node.experience.quality;
        report.node_updates.push_back(update);
    }
    for (const auto& [key, credit] : b) {
        ExperienceEdge& edge = g.edge_mut(key.first, key.second);
        EdgeUpdate update;
        update.key = key;
        update.credit = credit;
        update.phi_before = edge.phi;
        edge.phi += cfg.eta_w * credit * event.delta;
        update.phi_after = edge.phi;
        if (cfg.literal_w_recurrence)
            edge.w_prior = std::clamp(edge.w_prior + edge.phi, 0.0, 1.0);
        report.edge_updates.push_back(update);
    }
    g.bump_episode_counter();
    return report;
}

void insert_experience(MemoryGraph& g, const Experience& e, double q0,
                       const ProviderSet& providers, const SimilarityWeights& weights,
                       double theta_edge) {
    if (auto bad = validate_experience(e); !bad.empty()) {
        std::string msg = "insert_experience: invalid experience:";
        for (const auto& v : bad) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    if (g.has_node(e.id)) throw ValidationError("insert_experience: duplicate id " + e.id.value);
    if (!(q0 >= 0.0 && q0 <= 1.0)) throw ValidationError("insert_experience: q0 out of [0,1]");
    if (!providers.generation)
        throw ValidationError("insert_experience: generation provider missing");
    if (!providers.embedding)
        throw ValidationError("insert_experience: embedding provider missing");

    ExperienceNode node;
    node.experience = e;
    node.experience.quality = q0;
    node.experience.created_at = g.episode_counter();
    ParsedStructure structure = parse_entities_and_edges(e, *providers.generation);
    node.core_entities = std::move(structure.entities);
    node.role_edges = std::move(structure.role_edges);
    node.embedding = providers.embedding->embed({node_text(e)}).at(0).values;

    // Corpus statistics must already include the new node when its entity
    // overlaps are scored.
    CorpusStats stats = g.corpus_stats();
    stats.add_document(node.core_entities);

    std::vector<ExperienceEdge> pending;
    for (const auto& [other_id, other] : g.nodes()) {
        double s_entity = entity_similarity(node, other, stats);
        double s_structure = structure_similarity(node, other);
        double s_task = task_similarity(node.experience, other.experience);
        double s_synergy =
            synergy_similarity(node.experience, other.experience, *providers.generation);
        EdgeScoreBreakdown breakdown =
            initial_edge_weight(s_entity, s_structure, s_synergy, s_task, weights);
        if (breakdown.combined > theta_edge) {
            pending.push_back(ExperienceEdge{e.id, other_id, breakdown.combined, 0.0, breakdown});
            pending.push_back(ExperienceEdge{other_id, e.id, breakdown.combined, 0.0, breakdown});
        }
    }
    g.add_node(std::move(node));
    for (auto& edge : pending) g.add_edge(std::move(edge));
}

double delta_from_outcome(bool correct) { return correct ? 1.0 : -1.0; }

nlohmann::ordered_json report_to_json(const UpdateReport& report) {
    nlohmann::ordered_json root;
    root["task_id"] = report.task_id;
    root["delta"] = report.delta;
    auto& nodes = root["node_updates"] = nlohmann::ordered_json::array();
    for (const auto& u : report.node_updates) {
        nlohmann::ordered_json j;
        j["id"] = u.id.value;
        j["q_before"] = u.q_before;
        j["q_after"] = u.q_after;
        j["a"] = u.credit;
        nodes.push_back(std::move(j));
    }
    auto& edges = root["edge_updates"] = nlohmann::ordered_json::array();
    for (const auto& u : report.edge_updates) {
        nlohmann::ordered_json j;
        j["src"] = u.key.first.value;
        j["dst"] = u.key.second.value;
        j["phi_before"] = u.phi_before;
        j["phi_after"] = u.phi_after;
        j["b"] = u.credit;
        edges.push_back(std::move(j));
    }
    return root;
}

}  // namespace gsem
