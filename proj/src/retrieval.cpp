#include "gsem/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/log.hpp"
#include "gsem/prompts.hpp"

namespace gsem {

std::vector<std::string> validate(const RetrievalConfig& cfg) {
    std::vector<std::string> violations;
    if (cfg.k_seed < 1) violations.push_back("retrieval.k_seed must be >= 1");
    if (cfg.k_neighbors < 1) violations.push_back("retrieval.k_neighbors must be >= 1");
    if (cfg.t_max < 1) violations.push_back("retrieval.t_max must be >= 1");
    if (!(cfg.rerank_lambda >= 0.0 && cfg.rerank_lambda <= 1.0))
        violations.push_back("retrieval.rerank_lambda must be in [0,1]");
    if (cfg.bm25_k1 < 0.0) violations.push_back("retrieval.bm25_k1 must be >= 0");
    if (!(cfg.bm25_b >= 0.0 && cfg.bm25_b <= 1.0))
        violations.push_back("retrieval.bm25_b must be in [0,1]");
    return violations;
}

namespace {

std::vector<std::string> degraded_query_terms(const std::string& query) {
    std::vector<std::string> terms;
    for (const auto& word : split_words(normalize_text(query))) {
        std::size_t begin = 0, end = word.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(word[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(word[end - 1]))) --end;
        if (end > begin) terms.push_back(word.substr(begin, end - begin));
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

// Query entity surfaces via the entity-extraction exchange; tokenized.
// A null provider is a deliberate configuration and degrades silently;
// a failing one degrades with a warning.
std::vector<std::string> query_terms(const std::string& query, ChatProvider* provider) {
    if (!provider) return degraded_query_terms(query);
    ChatRequest request;
    request.system = prompts::kEntitySystem;
    request.user =
        prompts::render(prompts::kEntityHuman, {{"condition", query}, {"content", query}});
    request.temperature = 0.0;
    try {
        ChatResponse response = provider->chat(request);
        auto parsed = parse_json_lenient(response.text);
        if (!parsed || !parsed->is_object() || !parsed->contains("core_entities"))
            throw ParseError("query entity reply not parseable");
        std::vector<std::string> terms;
        for (const auto& item : (*parsed)["core_entities"]) {
            auto entity = normalize_entity(item.at("entity").get<std::string>(),
                                           EntityRole::Condition, nullptr);
            if (!entity) continue;
            for (auto& word : split_words(entity->surface)) terms.push_back(std::move(word));
        }
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        return terms;
    } catch (const GsemError& e) {
        log_warn(std::string("entity recall running degraded: ") + e.what());
        return degraded_query_terms(query);
    }
}

}  // namespace

std::vector<Candidate> entity_recall(const MemoryGraph& g, const std::string& query,
                                     ChatProvider* provider, int k, double bm25_k1,
                                     double bm25_b) {
    if (k < 1) throw ValidationError("entity_recall: k must be >= 1");
    std::vector<std::string> terms = query_terms(query, provider);
    if (terms.empty() || g.entity_index().empty()) return {};

    // Okapi BM25 over the entity index: each entity surface is a document.
    const auto& index = g.entity_index();
    const double doc_count = static_cast<double>(index.size());
    std::map<std::string, int> token_df;
    double total_len = 0.0;
    std::map<std::string, std::vector<std::string>> surface_tokens;
    for (const auto& [surface, node] : index) {
        auto tokens = split_words(surface);
        total_len += static_cast<double>(tokens.size());
        std::set<std::string> distinct(tokens.begin(), tokens.end());
        for (const auto& t : distinct) ++token_df[t];
        surface_tokens.emplace(surface, std::move(tokens));
    }
    const double avg_len = total_len / doc_count;

    std::map<ExperienceId, double> experience_score;
    for (const auto& [surface, node] : index) {
        const auto& tokens = surface_tokens[surface];
        double score = 0.0;
        for (const auto& term : terms) {
            int tf = static_cast<int>(std::count(tokens.begin(), tokens.end(), term));
            if (tf == 0) continue;
            auto df_it = token_df.find(term);
            double df = df_it == token_df.end() ? 0.0 : df_it->second;
            double idf = std::log(1.0 + (doc_count - df + 0.5) / (df + 0.5));
            double denom =
                tf + bm25_k1 * (1.0 - bm25_b + bm25_b * tokens.size() / avg_len);
            score += idf * (tf * (bm25_k1 + 1.0)) / denom;
        }
        if (score <= 0.0) continue;
        for (const auto& id : node.linked_experiences) experience_score[id] += score;
    }

    std::vector<Candidate> out;
    for (const auto& [id, score] : experience_score)
        out.push_back(Candidate{id, score, 0.0, 0.0});
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.sparse_score != b.sparse_score) return a.sparse_score > b.sparse_score;
        return a.id < b.id;
    });
    if (static_cast<int>(out.size()) > k) out.resize(k);
    return out;
}

std::vector<Candidate> embedding_recall(const MemoryGraph& g, const std::string& query,
                                        EmbeddingProvider& embed, int k) {
    if (k < 1) throw ValidationError("embedding_recall: k must be >= 1");
    if (g.nodes().empty()) return {};
    EmbeddingVector query_vector = embed.embed({query}).at(0);

    std::vector<Candidate> out;
    for (const auto& [id, node] : g.nodes()) {
        if (!node.embedding)
            throw ValidationError("embedding_recall: node " + id.value + " has no embedding");
        EmbeddingVector nv{*node.embedding};
        out.push_back(Candidate{id, 0.0, query_vector.cosine(nv), 0.0});
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dense_score != b.dense_score) return a.dense_score > b.dense_score;
        return a.id < b.id;
    });
    if (static_cast<int>(out.size()) > k) out.resize(k);
    return out;
}

std::vector<Candidate> rerank(const std::vector<Candidate>& sparse,
                              const std::vector<Candidate>& dense, double lambda, int k_seed) {
    if (k_seed < 1) throw ValidationError("rerank: k_seed must be >= 1");

    std::map<ExperienceId, Candidate> merged;
    std::set<ExperienceId> has_sparse, has_dense;
    for (const auto& c : sparse) {
        merged[c.id].id = c.id;
        merged[c.id].sparse_score = c.sparse_score;
        has_sparse.insert(c.id);
    }
    for (const auto& c : dense) {
        merged[c.id].id = c.id;
        merged[c.id].dense_score = c.dense_score;
        has_dense.insert(c.id);
    }
    if (merged.empty()) return {};

    // Min-max over the values present in each arm; absent entries sit at
    // the raw minimum (normalized 0); a constant arm normalizes to 1.
    auto normalizer = [](const std::vector<double>& values) {
        double lo = 0.0, hi = 0.0;
        if (!values.empty()) {
            lo = *std::min_element(values.begin(), values.end());
            hi = *std::max_element(values.begin(), values.end());
        }
        return [lo, hi](double x, bool present) {
            if (!present) return 0.0;
            if (hi == lo) return 1.0;
            return (x - lo) / (hi - lo);
        };
    };
    std::vector<double> sparse_values, dense_values;
    for (const auto& c : sparse) sparse_values.push_back(c.sparse_score);
    for (const auto& c : dense) dense_values.push_back(c.dense_score);
    auto norm_sparse = normalizer(sparse_values);
    auto norm_dense = normalizer(dense_values);

    std::vector<Candidate> out;
    for (auto& [id, c] : merged) {
        double ns = norm_sparse(c.sparse_score, has_sparse.count(id) != 0);
        double nd = norm_dense(c.dense_score, has_dense.count(id) != 0);
        c.rerank_score = lambda * nd + (1.0 - lambda) * ns;
        out.push_back(c);
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        if (a.rerank_score != b.rerank_score) return a.rerank_score > b.rerank_score;
        return a.id < b.id;
    });
    if (static_cast<int>(out.size()) > k_seed) out.resize(k_seed);
    return out;
}

std::vector<std::pair<ExperienceId, double>> forward_candidates(
    const MemoryGraph& g, const ExperienceId& position, const std::set<ExperienceId>& visited,
    int k_n) {
    if (k_n < 1) throw ValidationError("forward_candidates: k_n must be >= 1");
    std::vector<std::pair<ExperienceId, double>> out;
    for (const auto& [neighbor, weight] : g.neighbors(position)) {
        if (visited.count(neighbor)) continue;
        double quality = g.node(neighbor).experience.quality;
        out.emplace_back(neighbor, 0.5 * (weight + quality));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(out.size()) > k_n) out.resize(k_n);
    return out;
}

Action GreedyPolicy::choose(const PolicyView& view) {
    if (!view.already_collected && view.entry_score >= collect_threshold_)
        return Action{ActionKind::Collect, {}};
    if (!view.forward.empty()) return Action{ActionKind::Explore, view.forward.front().id};
    if (!view.backtrack.empty()) return Action{ActionKind::Backtrack, view.backtrack.front().id};
    return Action{ActionKind::Stop, {}};
}

namespace {

std::string candidates_block(const std::vector<CandidateView>& candidates) {
    if (candidates.empty()) return "(none)";
    std::string out;
    for (const auto& c : candidates) {
        if (!out.empty()) out.push_back('\n');
        out += "- " + c.id.value + " | " + c.condition;
    }
    return out;
}

std::optional<Action> parse_action_reply(const std::string& reply, const PolicyView& view) {
    std::vector<std::string> words = split_words(reply);
    if (words.empty()) return std::nullopt;
    std::string verb;
    for (char c : words[0]) verb.push_back(static_cast<char>(std::toupper(c)));

    auto legal = [&](const std::vector<CandidateView>& candidates, const std::string& id) {
        return std::any_of(candidates.begin(), candidates.end(),
                           [&](const CandidateView& c) { return c.id.value == id; });
    };
    if (verb == "COLLECT") return Action{ActionKind::Collect, {}};
    if (verb == "STOP") return Action{ActionKind::Stop, {}};
    if (words.size() < 2) return std::nullopt;
    if (verb == "EXPLORE" && legal(view.forward, words[1]))
        return Action{ActionKind::Explore, ExperienceId{words[1]}};
    if (verb == "BACKTRACK" && legal(view.backtrack, words[1]))
        return Action{ActionKind::Backtrack, ExperienceId{words[1]}};
    return std::nullopt;
}

}  // namespace

Action LlmPolicy::choose(const PolicyView& view) {
    std::string collected;
    for (const auto& id : view.collected) {
        if (!collected.empty()) collected += ", ";
        collected += id.value;
    }
    if (collected.empty()) collected = "(none)";

    ChatRequest request;
    request.system = prompts::kPolicySystem;
    request.user = prompts::render(
        prompts::kPolicyHuman,
        {{"query", view.query},
         {"position", view.position.value + " | " + view.position_condition},
         {"collected", collected},
         {"forward", candidates_block(view.forward)},
         {"backtrack", candidates_block(view.backtrack)}});
    request.temperature = 0.0;

    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            ChatResponse response = provider_.chat(request);
            if (auto action = parse_action_reply(response.text, view)) return *action;
        } catch (const ProviderError&) {
            // fall through to retry / fallback
        }
    }
    log_warn("policy reply unusable at " + view.position.value + "; using greedy fallback");
    return fallback_.choose(view);
}

namespace {

struct PathState {
    std::vector<ExperienceId> path;  // seed .. current position
    double entry_score = 0.0;
    bool active = true;
};

std::vector<CandidateView> to_views(const MemoryGraph& g,
                                    const std::vector<std::pair<ExperienceId, double>>& scored) {
    std::vector<CandidateView> views;
    views.reserve(scored.size());
    for (const auto& [id, score] : scored)
        views.push_back(CandidateView{id, g.node(id).experience.condition, score, {}});
    return views;
}

// Unvisited neighbors of every strict ancestor, best score per target,
// capped at k_n.
std::vector<CandidateView> backtrack_candidates(const MemoryGraph& g, const PathState& state,
                                                const std::set<ExperienceId>& visited, int k_n) {
    std::map<ExperienceId, CandidateView> best;
    for (std::size_t i = 0; i + 1 < state.path.size(); ++i) {
        const ExperienceId& ancestor = state.path[i];
        for (const auto& [id, score] : forward_candidates(g, ancestor, visited, k_n)) {
            auto it = best.find(id);
            if (it == best.end() || score > it->second.score) {
                best[id] = CandidateView{id, g.node(id).experience.condition, score, ancestor};
            }
        }
    }
    std::vector<CandidateView> out;
    for (auto& [id, view] : best) out.push_back(std::move(view));
    std::stable_sort(out.begin(), out.end(), [](const CandidateView& a, const CandidateView& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(out.size()) > k_n) out.resize(k_n);
    return out;
}

}  // namespace

RetrievalTrace traverse(const MemoryGraph& g, const std::vector<Candidate>& seeds,
                        ActionPolicy& policy, const RetrievalConfig& cfg,
                        const std::string& query) {
    if (seeds.empty()) throw ValidationError("traverse: seed list is empty");
    if (auto bad = validate(cfg); !bad.empty()) throw ValidationError(bad.front());
    for (const auto& seed : seeds)
        if (!g.has_node(seed.id))
            throw ValidationError("traverse: seed not in graph: " + seed.id.value);

    RetrievalTrace trace;
    trace.query = query;
    std::set<ExperienceId> visited;
    std::set<ExperienceId> collected_set;
    std::vector<PathState> paths;
    for (const auto& seed : seeds) {
        trace.seeds.push_back(seed.id);
        if (visited.insert(seed.id).second)
            paths.push_back(PathState{{seed.id}, seed.rerank_score, true});
    }

    bool budget_left = true;
    while (budget_left) {
        bool any_active = false;
        for (PathState& state : paths) {
            if (!state.active) continue;
            const ExperienceId position = state.path.back();  // copy: path mutates below

            PolicyView view;
            view.query = trace.query;
            view.position = position;
            view.position_condition = g.node(position).experience.condition;
            view.entry_score = state.entry_score;
            view.already_collected = collected_set.count(position) != 0;
            view.forward = to_views(g, forward_candidates(g, position, visited, cfg.k_neighbors));
            view.backtrack = backtrack_candidates(g, state, visited, cfg.k_neighbors);
            view.collected = trace.collected;

            if (view.already_collected && view.forward.empty() && view.backtrack.empty()) {
                state.active = false;  // nothing legal left; no step consumed
                continue;
            }
            any_active = true;

            Action action = policy.choose(view);
            switch (action.kind) {
                case ActionKind::Collect:
                    if (!collected_set.count(position)) {
                        collected_set.insert(position);
                        trace.collected.push_back(position);
                    }
                    break;
                case ActionKind::Explore: {
                    auto it = std::find_if(view.forward.begin(), view.forward.end(),
                                           [&](const CandidateView& c) { return c.id == action.target; });
                    if (it == view.forward.end())
                        throw ValidationError("illegal Explore target at step " +
                                              std::to_string(trace.steps_used) + ": " +
                                              action.target.value);
                    visited.insert(action.target);
                    state.path.push_back(action.target);
                    state.entry_score = it->score;
                    break;
                }
                case ActionKind::Backtrack: {
                    auto it = std::find_if(view.backtrack.begin(), view.backtrack.end(),
                                           [&](const CandidateView& c) { return c.id == action.target; });
                    if (it == view.backtrack.end())
                        throw ValidationError("illegal Backtrack target at step " +
                                              std::to_string(trace.steps_used) + ": " +
                                              action.target.value);
                    // Path resumes from the ancestor that owns the candidate.
                    auto anchor = std::find(state.path.begin(), state.path.end(), it->via);
                    state.path.erase(anchor + 1, state.path.end());
                    visited.insert(action.target);
                    state.path.push_back(action.target);
                    state.entry_score = it->score;
                    break;
                }
                case ActionKind::Stop:
                    state.active = false;
                    break;
            }
            trace.steps.push_back(TraceStep{position, view.forward, view.backtrack, action});
            ++trace.steps_used;
            if (trace.steps_used >= cfg.t_max) {
                budget_left = false;
                break;
            }
        }
        if (!any_active) break;
    }
    return trace;
}

RetrievalResult retrieve(const MemoryGraph& g, const std::string& query,
                         const ProviderSet& providers, const RetrievalConfig& cfg,
                         ActionPolicy& policy) {
    if (g.nodes().empty()) throw ValidationError("retrieve: memory graph is empty");
    if (!providers.embedding) throw ValidationError("retrieve: embedding provider missing");
    if (auto bad = validate(cfg); !bad.empty()) throw ValidationError(bad.front());

    std::vector<Candidate> sparse =
        entity_recall(g, query, providers.policy, cfg.k_seed, cfg.bm25_k1, cfg.bm25_b);
    std::vector<Candidate> dense = embedding_recall(g, query, *providers.embedding, cfg.k_seed);
    std::vector<Candidate> seeds = rerank(sparse, dense, cfg.rerank_lambda, cfg.k_seed);

    RetrievalResult result;
    result.trace.query = query;
    if (seeds.empty()) return result;  // legal: nothing recalled, nothing collected

    result.trace = traverse(g, seeds, policy, cfg, query);
    for (const auto& id : result.trace.collected)
        result.experiences.push_back(g.node(id).experience);
    return result;
}

namespace {

const char* to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::Collect: return "collect";
        case ActionKind::Explore: return "explore";
        case ActionKind::Backtrack: return "backtrack";
        case ActionKind::Stop: return "stop";
    }
    return "stop";
}

nlohmann::ordered_json candidate_views_to_json(const std::vector<CandidateView>& views,
                                               bool with_via) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : views) {
        nlohmann::ordered_json j;
        j["id"] = c.id.value;
        j["score"] = c.score;
        if (with_via) j["via"] = c.via.value;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

nlohmann::ordered_json trace_to_json(const RetrievalTrace& trace) {
    nlohmann::ordered_json root;
    root["query"] = trace.query;
    auto& seeds = root["seeds"] = nlohmann::ordered_json::array();
    for (const auto& id : trace.seeds) seeds.push_back(id.value);
    auto& steps = root["steps"] = nlohmann::ordered_json::array();
    for (const auto& step : trace.steps) {
        nlohmann::ordered_json sj;
        sj["position"] = step.position.value;
        sj["forward"] = candidate_views_to_json(step.forward, false);
        sj["backtrack"] = candidate_views_to_json(step.backtrack, true);
        nlohmann::ordered_json aj;
        aj["kind"] = to_string(step.action.kind);
        if (step.action.kind == ActionKind::Explore || step.action.kind == ActionKind::Backtrack)
            aj["target"] = step.action.target.value;
        sj["action"] = std::move(aj);
        steps.push_back(std::move(sj));
    }
    auto& collected = root["collected"] = nlohmann::ordered_json::array();
    for (const auto& id : trace.collected) collected.push_back(id.value);
    root["steps_used"] = trace.steps_used;
    return root;
}

RetrievalTrace trace_from_json(const nlohmann::json& j) {
    RetrievalTrace trace;
    try {
        trace.query = j.at("query").get<std::string>();
        for (const auto& s : j.at("seeds")) trace.seeds.push_back(ExperienceId{s.get<std::string>()});
        for (const auto& sj : j.at("steps")) {
            TraceStep step;
            step.position = ExperienceId{sj.at("position").get<std::string>()};
            for (const auto& cj : sj.at("forward"))
                step.forward.push_back(CandidateView{ExperienceId{cj.at("id").get<std::string>()},
                                                     "", cj.at("score").get<double>(), {}});
            for (const auto& cj : sj.at("backtrack"))
                step.backtrack.push_back(
                    CandidateView{ExperienceId{cj.at("id").get<std::string>()}, "",
                                  cj.at("score").get<double>(),
                                  ExperienceId{cj.at("via").get<std::string>()}});
            const auto& aj = sj.at("action");
            std::string kind = aj.at("kind").get<std::string>();
            if (kind == "collect") step.action.kind = ActionKind::Collect;
            else if (kind == "explore") step.action.kind = ActionKind::Explore;
            else if (kind == "backtrack") step.action.kind = ActionKind::Backtrack;
            else if (kind == "stop") step.action.kind = ActionKind::Stop;
            else throw ParseError("trace: unknown action kind " + kind);
            if (aj.contains("target"))
                step.action.target = ExperienceId{aj.at("target").get<std::string>()};
            trace.steps.push_back(std::move(step));
        }
        for (const auto& c : j.at("collected"))
            trace.collected.push_back(ExperienceId{c.get<std::string>()});
        trace.steps_used = j.at("steps_used").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("trace: ") + e.what());
    }
    return trace;
}

}  // namespace gsem
