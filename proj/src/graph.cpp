#include "gsem/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"

namespace gsem {

double effective_weight(const ExperienceEdge& edge) {
    return std::clamp(edge.w_prior + edge.phi, 0.0, 1.0);
}

void CorpusStats::add_document(const std::vector<Entity>& core_entities) {
    ++doc_count;
    std::set<std::string> distinct;
    for (const auto& e : core_entities) distinct.insert(e.surface);
    for (const auto& s : distinct) ++df[s];
}

void MemoryGraph::add_node(ExperienceNode node) {
    const ExperienceId id = node.experience.id;
    if (auto bad = validate_experience(node.experience); !bad.empty()) {
        std::string msg = "invalid experience " + id.value + ":";
        for (const auto& v : bad) msg += " " + v + ";";
        throw ValidationError(msg);
    }
    if (nodes_.count(id)) throw ValidationError("duplicate experience id: " + id.value);

    for (const auto& edge : node.role_edges) {
        auto present = [&](const Entity& e) {
            return std::find(node.core_entities.begin(), node.core_entities.end(), e) !=
                   node.core_entities.end();
        };
        if (!present(edge.from) || !present(edge.to))
            throw ValidationError("role edge endpoint not in core_entities of " + id.value);
    }
    if (node.embedding) {
        double sq = 0.0;
        for (double x : *node.embedding) sq += x * x;
        if (std::fabs(std::sqrt(sq) - 1.0) > 1e-6)
            throw ValidationError("embedding of " + id.value + " is not unit norm");
    }

    std::set<std::string> distinct;
    for (const auto& e : node.core_entities) distinct.insert(e.surface);
    for (const auto& surface : distinct) {
        auto it = entity_index_.find(surface);
        if (it == entity_index_.end()) {
            auto entity_it = std::find_if(node.core_entities.begin(), node.core_entities.end(),
                                          [&](const Entity& e) { return e.surface == surface; });
            it = entity_index_.emplace(surface, EntityNode{*entity_it, {}}).first;
        }
        it->second.linked_experiences.insert(id);
        ++entity_df_[surface];
    }
    nodes_.emplace(id, std::move(node));
}

void MemoryGraph::add_edge(ExperienceEdge edge) {
    if (edge.src == edge.dst)
        throw ValidationError("self-edge not allowed: " + edge.src.value);
    if (!nodes_.count(edge.src))
        throw ValidationError("edge endpoint missing: " + edge.src.value);
    if (!nodes_.count(edge.dst))
        throw ValidationError("edge endpoint missing: " + edge.dst.value);
    EdgeKey key{edge.src, edge.dst};
    if (edges_.count(key))
        throw ValidationError("duplicate edge: " + edge.src.value + " -> " + edge.dst.value);
    if (!(edge.w_prior >= 0.0 && edge.w_prior <= 1.0))
        throw ValidationError("edge w_prior out of [0,1]: " + edge.src.value + " -> " +
                              edge.dst.value);
    edges_.emplace(std::move(key), std::move(edge));
}

const ExperienceNode& MemoryGraph::node(const ExperienceId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ValidationError("unknown experience id: " + id.value);
    return it->second;
}

ExperienceNode& MemoryGraph::node_mut(const ExperienceId& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw ValidationError("unknown experience id: " + id.value);
    return it->second;
}

const ExperienceEdge* MemoryGraph::find_edge(const ExperienceId& src,
                                             const ExperienceId& dst) const {
    auto it = edges_.find(EdgeKey{src, dst});
    return it == edges_.end() ? nullptr : &it->second;
}

ExperienceEdge& MemoryGraph::edge_mut(const ExperienceId& src, const ExperienceId& dst) {
    auto it = edges_.find(EdgeKey{src, dst});
    if (it == edges_.end())
        throw ValidationError("unknown edge: " + src.value + " -> " + dst.value);
    return it->second;
}

std::vector<std::pair<ExperienceId, double>> MemoryGraph::neighbors(
    const ExperienceId& id) const {
    if (!nodes_.count(id)) throw ValidationError("unknown experience id: " + id.value);
    std::vector<std::pair<ExperienceId, double>> out;
    for (auto it = edges_.lower_bound(EdgeKey{id, ExperienceId{}});
         it != edges_.end() && it->first.first == id; ++it) {
        out.emplace_back(it->first.second, effective_weight(it->second));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

CorpusStats MemoryGraph::corpus_stats() const {
    CorpusStats stats;
    stats.doc_count = nodes_.size();
    stats.df = entity_df_;
    return stats;
}

std::vector<std::string> MemoryGraph::check_integrity() const {
    std::vector<std::string> problems;
    std::map<std::string, int> df;
    std::map<std::string, std::set<ExperienceId>> links;
    for (const auto& [id, node] : nodes_) {
        std::set<std::string> distinct;
        for (const auto& e : node.core_entities) distinct.insert(e.surface);
        for (const auto& s : distinct) {
            ++df[s];
            links[s].insert(id);
        }
    }
    if (df != entity_df_) problems.push_back("entity_df does not match recount");
    if (links.size() != entity_index_.size())
        problems.push_back("entity_index size does not match recount");
    for (const auto& [surface, node] : entity_index_) {
        auto it = links.find(surface);
        if (it == links.end() || it->second != node.linked_experiences)
            problems.push_back("entity_index links stale for: " + surface);
        if (node.linked_experiences.empty())
            problems.push_back("entity node with no linked experiences: " + surface);
    }
    for (const auto& [key, edge] : edges_) {
        if (!nodes_.count(key.first) || !nodes_.count(key.second))
            problems.push_back("dangling edge: " + key.first.value + " -> " + key.second.value);
        if (key.first != edge.src || key.second != edge.dst)
            problems.push_back("edge key mismatch: " + key.first.value + " -> " + key.second.value);
    }
    return problems;
}

namespace {

nlohmann::ordered_json entity_to_json(const Entity& e) {
    nlohmann::ordered_json j;
    j["role"] = to_string(e.role);
    j["surface"] = e.surface;
    return j;
}

Entity entity_from_json(const nlohmann::json& j) {
    auto role = entity_role_from_string(j.at("role").get<std::string>());
    if (!role) throw SnapshotError("unknown entity role: " + j.at("role").get<std::string>());
    return Entity{j.at("surface").get<std::string>(), *role};
}

nlohmann::ordered_json node_to_json(const ExperienceNode& n) {
    const Experience& e = n.experience;
    nlohmann::ordered_json j;  // keys alphabetical
    j["condition"] = e.condition;
    j["content"] = e.content;
    auto& ents = j["core_entities"] = nlohmann::ordered_json::array();
    for (const auto& ent : n.core_entities) ents.push_back(entity_to_json(ent));
    j["created_at"] = e.created_at;
    if (n.embedding) {
        auto& emb = j["embedding"] = nlohmann::ordered_json::array();
        for (double x : *n.embedding) emb.push_back(x);
    } else {
        j["embedding"] = nullptr;
    }
    j["evidence"] = e.evidence;
    j["id"] = e.id.value;
    j["polarity"] = to_string(e.polarity);
    j["quality"] = e.quality;
    auto& redges = j["role_edges"] = nlohmann::ordered_json::array();
    for (const auto& re : n.role_edges) {
        nlohmann::ordered_json rj;
        rj["from"] = re.from.surface;
        rj["from_role"] = to_string(re.from.role);
        rj["to"] = re.to.surface;
        rj["to_role"] = to_string(re.to.role);
        redges.push_back(std::move(rj));
    }
    j["task_type"] = e.task_type;
    return j;
}

ExperienceNode node_from_json(const nlohmann::json& j) {
    ExperienceNode n;
    Experience& e = n.experience;
    e.id = ExperienceId{j.at("id").get<std::string>()};
    e.condition = j.at("condition").get<std::string>();
    e.content = j.at("content").get<std::string>();
    auto pol = polarity_from_string(j.at("polarity").get<std::string>());
    if (!pol) throw SnapshotError("unknown polarity: " + j.at("polarity").get<std::string>());
    e.polarity = *pol;
    e.quality = j.at("quality").get<double>();
    e.task_type = j.at("task_type").get<std::string>();
    e.evidence = j.at("evidence").get<std::string>();
    e.created_at = j.at("created_at").get<std::int64_t>();
    for (const auto& ej : j.at("core_entities")) n.core_entities.push_back(entity_from_json(ej));
    for (const auto& rj : j.at("role_edges")) {
        auto from_role = entity_role_from_string(rj.at("from_role").get<std::string>());
        auto to_role = entity_role_from_string(rj.at("to_role").get<std::string>());
        if (!from_role || !to_role) throw SnapshotError("unknown role edge role");
        n.role_edges.push_back(RoleEdge{Entity{rj.at("from").get<std::string>(), *from_role},
                                        Entity{rj.at("to").get<std::string>(), *to_role}});
    }
    if (!j.at("embedding").is_null())
        n.embedding = j.at("embedding").get<std::vector<double>>();
    return n;
}

}  // namespace

GraphSnapshot save_snapshot(const MemoryGraph& g) {
    nlohmann::ordered_json root;
    root["schema_version"] = kSnapshotSchemaVersion;
    root["episode_counter"] = g.episode_counter();
    auto& nodes = root["nodes"] = nlohmann::ordered_json::array();
    for (const auto& [id, node] : g.nodes()) nodes.push_back(node_to_json(node));
    auto& edges = root["edges"] = nlohmann::ordered_json::array();
    for (const auto& [key, edge] : g.edges()) {
        nlohmann::ordered_json ej;
        nlohmann::ordered_json bj;
        bj["combined"] = edge.breakdown.combined;
        bj["s_entity"] = edge.breakdown.s_entity;
        bj["s_structure"] = edge.breakdown.s_structure;
        bj["s_synergy"] = edge.breakdown.s_synergy;
        bj["s_task"] = edge.breakdown.s_task;
        ej["breakdown"] = std::move(bj);
        ej["dst"] = edge.dst.value;
        ej["phi"] = edge.phi;
        ej["src"] = edge.src.value;
        ej["w_prior"] = edge.w_prior;
        edges.push_back(std::move(ej));
    }
    return GraphSnapshot{kSnapshotSchemaVersion, dump_canonical(root) + "\n"};
}

MemoryGraph load_snapshot(const GraphSnapshot& snapshot) {
    nlohmann::json root = parse_json(snapshot.payload, "snapshot");
    if (!root.is_object() || !root.contains("schema_version"))
        throw SnapshotError("snapshot: missing schema_version");
    int version = root.at("schema_version").get<int>();
    if (version != kSnapshotSchemaVersion)
        throw SnapshotError("unsupported snapshot schema_version: " + std::to_string(version));

    MemoryGraph g;
    try {
        for (const auto& nj : root.at("nodes")) g.add_node(node_from_json(nj));
        for (const auto& ej : root.at("edges")) {
            ExperienceEdge edge;
            edge.src = ExperienceId{ej.at("src").get<std::string>()};
            edge.dst = ExperienceId{ej.at("dst").get<std::string>()};
            edge.w_prior = ej.at("w_prior").get<double>();
            edge.phi = ej.at("phi").get<double>();
            const auto& bj = ej.at("breakdown");
            edge.breakdown.s_entity = bj.at("s_entity").get<double>();
            edge.breakdown.s_structure = bj.at("s_structure").get<double>();
            edge.breakdown.s_synergy = bj.at("s_synergy").get<double>();
            edge.breakdown.s_task = bj.at("s_task").get<double>();
            edge.breakdown.combined = bj.at("combined").get<double>();
            g.add_edge(std::move(edge));
        }
        g.set_episode_counter(root.at("episode_counter").get<std::int64_t>());
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(std::string("snapshot: ") + e.what());
    }
    return g;
}

void save_snapshot_file(const MemoryGraph& g, const std::filesystem::path& path) {
    GraphSnapshot snapshot = save_snapshot(g);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GsemError("cannot write snapshot file: " + tmp.string());
        out << snapshot.payload;
    }
    std::filesystem::rename(tmp, path);
}

MemoryGraph load_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read snapshot file: " + path.string());
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_snapshot(GraphSnapshot{kSnapshotSchemaVersion, std::move(payload)});
}

}  // namespace gsem
