#include "gsem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "gsem/error.hpp"
#include "gsem/evolution.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/retrieval.hpp"

namespace gsem {

std::vector<std::string> validate(const SyntheticScenario& scenario) {
    std::vector<std::string> violations;
    if (scenario.n_good < 0 || scenario.n_bad < 0)
        violations.push_back("scenario: n_good/n_bad must be >= 0");
    if (scenario.n_good + scenario.n_bad < 1)
        violations.push_back("scenario: needs at least one planted experience");
    auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!unit(scenario.good_utility) || !unit(scenario.bad_utility))
        violations.push_back("scenario: utilities must be in [0,1]");
    if (!unit(scenario.p_correct_base))
        violations.push_back("scenario: p_correct_base must be in [0,1]");
    for (const auto& [id, u] : scenario.planted_utility)
        if (!unit(u)) violations.push_back("scenario: planted_utility." + id + " out of [0,1]");
    if (scenario.n_episodes < 0) violations.push_back("scenario: n_episodes must be >= 0");
    return violations;
}

SyntheticScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read scenario file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root = parse_json(text, "scenario " + path.string());

    SyntheticScenario scenario;
    try {
        scenario.n_good = root.value("n_good", scenario.n_good);
        scenario.n_bad = root.value("n_bad", scenario.n_bad);
        scenario.good_utility = root.value("good_utility", scenario.good_utility);
        scenario.bad_utility = root.value("bad_utility", scenario.bad_utility);
        scenario.p_correct_base = root.value("p_correct_base", scenario.p_correct_base);
        scenario.utility_gain = root.value("utility_gain", scenario.utility_gain);
        scenario.n_episodes = root.value("n_episodes", scenario.n_episodes);
        scenario.rng_seed = root.value("rng_seed", scenario.rng_seed);
        if (root.contains("planted_utility"))
            for (auto it = root["planted_utility"].begin(); it != root["planted_utility"].end();
                 ++it)
                scenario.planted_utility[it.key()] = it.value().get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario " + path.string() + ": " + e.what());
    }
    if (auto bad = validate(scenario); !bad.empty())
        throw ValidationError("scenario " + path.string() + ": " + bad.front());
    return scenario;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    double mean = (n + 1) / 2.0;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (rx[i] - mean) * (ry[i] - mean);
        var_x += (rx[i] - mean) * (rx[i] - mean);
        var_y += (ry[i] - mean) * (ry[i] - mean);
    }
    if (var_x == 0.0 || var_y == 0.0) return 0.0;
    return cov / std::sqrt(var_x * var_y);
}

namespace {

const char* kVocab[] = {
    "marker00", "marker01", "marker02", "marker03", "marker04", "marker05", "marker06",
    "marker07", "marker08", "marker09", "marker10", "marker11", "marker12", "marker13",
    "marker14", "marker15", "marker16", "marker17", "marker18", "marker19", "marker20",
    "marker21", "marker22", "marker23", "marker24", "marker25", "marker26", "marker27",
    "marker28", "marker29", "marker30", "marker31", "marker32", "marker33", "marker34",
    "marker35", "marker36", "marker37", "marker38", "marker39", "marker40", "marker41",
    "marker42", "marker43", "marker44", "marker45", "marker46", "marker47",
    "marker48", "marker49", "marker50", "marker51", "marker52", "marker53", "marker54",
    "marker55", "marker56", "marker57", "marker58", "marker59", "marker60", "marker61",
    "marker62", "marker63", "marker64", "marker65", "marker66", "marker67", "marker68",
    "marker69", "marker70", "marker71"};
constexpr std::size_t kVocabSize = sizeof(kVocab) / sizeof(kVocab[0]);
constexpr std::size_t kEntitiesPerNode = 3;
constexpr std::size_t kEmbeddingDim = 64;
constexpr double kLinkedEdgeProbability = 0.35;
constexpr double kUnrelatedEdgeProbability = 0.02;

std::string planted_id(bool good, int index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "sim_%c%02d", good ? 'g' : 'b', index);
    return buf;
}

ExperienceNode make_planted_node(const std::string& id, bool good, Rng& rng) {
    ExperienceNode node;
    Experience& e = node.experience;
    e.id = ExperienceId{id};
    e.polarity = good ? Polarity::Indication : Polarity::Contraindication;
    e.quality = 0.5;
    e.task_type = "synthetic";
    e.evidence = "planted";
    e.created_at = 0;

    // Three distinct vocabulary entities as condition/action/outcome.
    // Each group draws from its own band with a small shared overlap, the
    // way related experiences share terminology: retrieval then surfaces
    // mostly same-group sets, which is the signal evolution must recover.
    const std::size_t band = kVocabSize * 7 / 12;
    const std::size_t offset = good ? 0 : kVocabSize - band;
    std::vector<std::size_t> picks;
    while (picks.size() < kEntitiesPerNode) {
        std::size_t pick = offset + static_cast<std::size_t>(rng.below(band));
        if (std::find(picks.begin(), picks.end(), pick) == picks.end()) picks.push_back(pick);
    }
    const EntityRole roles[] = {EntityRole::Condition, EntityRole::Action, EntityRole::Outcome};
    for (std::size_t i = 0; i < kEntitiesPerNode; ++i)
        node.core_entities.push_back(Entity{kVocab[picks[i]], roles[i]});
    node.role_edges.push_back(RoleEdge{node.core_entities[0], node.core_entities[1]});
    node.role_edges.push_back(RoleEdge{node.core_entities[1], node.core_entities[2]});

    e.condition = "synthetic case involving " + node.core_entities[0].surface + " and " +
                  node.core_entities[1].surface;
    e.content = "apply " + node.core_entities[1].surface + " toward " +
                node.core_entities[2].surface;

    std::vector<double> embedding(kEmbeddingDim);
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (auto& v : embedding) {
            v = rng.uniform(-1.0, 1.0);
            norm_sq += v * v;
        }
    } while (norm_sq == 0.0);
    double norm = std::sqrt(norm_sq);
    for (auto& v : embedding) v /= norm;
    node.embedding = std::move(embedding);
    return node;
}

}  // namespace

MemoryGraph build_synthetic_graph(const SyntheticScenario& scenario,
                                  std::map<ExperienceId, double>& utility_out) {
    Rng rng(scenario.rng_seed);
    MemoryGraph g;
    utility_out.clear();

    // Creation order: all good then all bad, so the RNG stream is fixed;
    // the graph itself keys nodes by id.
    std::vector<ExperienceNode> nodes;
    for (int i = 0; i < scenario.n_good; ++i)
        nodes.push_back(make_planted_node(planted_id(true, i), true, rng));
    for (int i = 0; i < scenario.n_bad; ++i)
        nodes.push_back(make_planted_node(planted_id(false, i), false, rng));

    for (auto& node : nodes) {
        bool good = node.experience.polarity == Polarity::Indication;
        double fallback = good ? scenario.good_utility : scenario.bad_utility;
        auto it = scenario.planted_utility.find(node.experience.id.value);
        utility_out[node.experience.id] = it != scenario.planted_utility.end() ? it->second
                                                                               : fallback;
        g.add_node(std::move(node));
    }

    // Edges follow entity overlap, mirroring similarity-driven
    // construction: sharing nodes link often, disjoint ones rarely.
    auto shares_entity = [&](const ExperienceId& a, const ExperienceId& b) {
        for (const auto& ea : g.nodes().at(a).core_entities)
            for (const auto& eb : g.nodes().at(b).core_entities)
                if (ea.surface == eb.surface) return true;
        return false;
    };
    std::vector<ExperienceId> ids;
    for (const auto& [id, _] : g.nodes()) ids.push_back(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            double coin = rng.uniform();
            double w = rng.uniform(0.2, 0.5);  // drawn unconditionally: fixed stream shape
            double probability = shares_entity(ids[i], ids[j]) ? kLinkedEdgeProbability
                                                               : kUnrelatedEdgeProbability;
            if (coin >= probability) continue;
            EdgeScoreBreakdown breakdown{w, w, w, w, w};
            g.add_edge(ExperienceEdge{ids[i], ids[j], w, 0.0, breakdown});
            g.add_edge(ExperienceEdge{ids[j], ids[i], w, 0.0, breakdown});
        }
    }
    return g;
}

namespace {

SimulationRow measure(int episode, const MemoryGraph& g,
                      const std::map<ExperienceId, double>& utility) {
    SimulationRow row;
    row.episode = episode;
    double good_sum = 0.0, bad_sum = 0.0;
    int good_n = 0, bad_n = 0;
    std::vector<double> q_values, u_values;
    for (const auto& [id, node] : g.nodes()) {  // sorted-id accumulation
        double u = utility.at(id);
        double q = node.experience.quality;
        q_values.push_back(q);
        u_values.push_back(u);
        if (node.experience.polarity == Polarity::Indication) {
            good_sum += q;
            ++good_n;
        } else {
            bad_sum += q;
            ++bad_n;
        }
    }
    row.mean_q_good = good_n ? good_sum / good_n : 0.0;
    row.mean_q_bad = bad_n ? bad_sum / bad_n : 0.0;
    row.spearman = spearman_rank_correlation(q_values, u_values);
    return row;
}

}  // namespace

SimulationResult run_simulation(const SyntheticScenario& scenario, const EngineConfig& cfg) {
    if (auto bad = validate(scenario); !bad.empty()) throw ValidationError(bad.front());

    SimulationResult result;
    result.graph = build_synthetic_graph(scenario, result.utility);

    std::vector<ExperienceId> ids;
    for (const auto& [id, _] : result.graph.nodes()) ids.push_back(id);

    // Episode stream is seeded independently of graph construction.
    Rng rng(scenario.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    TrigramHashEmbedder embedder;
    ProviderSet providers;
    providers.embedding = &embedder;
    GreedyPolicy policy(cfg.retrieval.collect_threshold);

    for (int episode = 1; episode <= scenario.n_episodes; ++episode) {
        const ExperienceNode& anchor =
            result.graph.node(ids[static_cast<std::size_t>(rng.below(ids.size()))]);
        std::string query;
        for (const auto& entity : anchor.core_entities) {
            if (!query.empty()) query.push_back(' ');
            query += entity.surface;
        }

        RetrievalResult retrieved =
            retrieve(result.graph, query, providers, cfg.retrieval, policy);

        if (!retrieved.trace.collected.empty()) {
            std::vector<double> utilities;
            for (const auto& id : retrieved.trace.collected)
                utilities.push_back(result.utility.at(id));
            std::sort(utilities.begin(), utilities.end());  // order-independent sum
            double mean_u = std::accumulate(utilities.begin(), utilities.end(), 0.0) /
                            static_cast<double>(utilities.size());
            double p = std::clamp(
                scenario.p_correct_base + scenario.utility_gain * (mean_u - 0.5), 0.0, 1.0);
            bool correct = rng.uniform() < p;

            FeedbackEvent event;
            event.task_id = "sim_ep_" + std::to_string(episode);
            event.delta = delta_from_outcome(correct);
            event.trace = retrieved.trace;
            apply_feedback(result.graph, event, cfg.evolution);
        } else {
            result.graph.bump_episode_counter();
        }
        result.rows.push_back(measure(episode, result.graph, result.utility));
    }
    if (scenario.n_episodes == 0)
        result.rows.push_back(measure(0, result.graph, result.utility));
    return result;
}

std::string simulation_csv(const std::vector<SimulationRow>& rows) {
    std::string out = "episode,mean_q_good,mean_q_bad,spearman\n";
    for (const auto& row : rows) {
        out += std::to_string(row.episode) + "," + format_real(row.mean_q_good) + "," +
               format_real(row.mean_q_bad) + "," + format_real(row.spearman) + "\n";
    }
    return out;
}

}  // namespace gsem
