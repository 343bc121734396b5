#include "gsem/construction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/log.hpp"
#include "gsem/prompts.hpp"
#include "gsem/similarity.hpp"

namespace gsem {

std::vector<std::string> validate(const ConstructionConfig& cfg) {
    std::vector<std::string> violations;
    if (cfg.n_traj < 1) violations.push_back("construction.n_traj must be >= 1");
    if (cfg.n_erv < 1) violations.push_back("construction.n_erv must be >= 1");
    if (!(cfg.dedup_threshold > 0.0 && cfg.dedup_threshold <= 1.0))
        violations.push_back("construction.dedup_threshold must be in (0,1]");
    if (!(cfg.theta_edge >= 0.0 && cfg.theta_edge <= 1.0))
        violations.push_back("construction.theta_edge must be in [0,1]");
    for (auto& v : validate(cfg.similarity_weights)) violations.push_back(v);
    return violations;
}

std::string node_text(const Experience& e) { return e.condition + "\n" + e.content; }

std::string render_injection(std::span<const Experience> experiences) {
    if (experiences.empty()) return "";
    std::string out = "Relevant experience:\n";
    for (const Experience& e : experiences) {
        out += "- [" + to_string(e.polarity) + "] condition: " + e.condition +
               " | strategy: " + e.content + "\n";
    }
    out += "\n";
    return out;
}

namespace {

// Strips token-edge punctuation so "b)." and "b" compare equal.
std::string normalize_answer(const std::string& s) {
    std::vector<std::string> words = split_words(normalize_text(s));
    std::string out;
    for (auto& w : words) {
        std::size_t begin = 0, end = w.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(w[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(w[end - 1]))) --end;
        if (begin == end) continue;
        if (!out.empty()) out.push_back(' ');
        out += w.substr(begin, end - begin);
    }
    return out;
}

}  // namespace

bool answers_match(const std::string& answer, const std::string& gold, ChatProvider* judge) {
    std::string na = normalize_answer(answer);
    std::string ng = normalize_answer(gold);
    if (na == ng) return true;
    std::vector<std::string> gold_words = split_words(ng);
    if (gold_words.size() <= 1) {
        // Closed-form answer: accept the first answer token, nothing looser.
        std::vector<std::string> answer_words = split_words(na);
        return !answer_words.empty() && !gold_words.empty() && answer_words.front() == gold_words.front();
    }
    if (!judge) return false;
    ChatRequest request;
    request.system = prompts::kJudgeSystem;
    request.user = prompts::render(prompts::kJudgeHuman,
                                   {{"gold_answer", gold}, {"candidate_answer", answer}});
    request.temperature = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = normalize_text(judge->chat(request).text);
        if (reply.rfind("yes", 0) == 0) return true;
        if (reply.rfind("no", 0) == 0) return false;
    }
    throw ParseError("judge reply was neither YES nor NO");
}

Trajectory parse_trajectory_reply(const std::string& case_id, const std::string& reply) {
    static const std::string kMarker = "FINAL ANSWER:";
    auto marker = reply.find(kMarker);
    if (marker == std::string::npos)
        throw ParseError("trajectory reply for " + case_id + " has no FINAL ANSWER line");

    Trajectory t;
    t.case_id = case_id;
    std::istringstream lines(reply.substr(0, marker));
    std::string line;
    while (std::getline(lines, line)) {
        // Trim whitespace and a leading "N." / "N)" step number.
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t digits = i;
        while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits])))
            ++digits;
        if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')'))
            i = digits + 1;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::string body = line.substr(i);
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back())))
            body.pop_back();
        if (!body.empty()) t.steps.push_back(std::move(body));
    }
    t.final_answer = reply.substr(marker + kMarker.size());
    // Keep the first line after the marker.
    if (auto nl = t.final_answer.find('\n'); nl != std::string::npos)
        t.final_answer.resize(nl);
    if (t.steps.empty())
        throw ParseError("trajectory reply for " + case_id + " has no steps");
    return t;
}

std::vector<Trajectory> sample_trajectories(const CaseRecord& record, ChatProvider& provider,
                                            int n, std::uint64_t seed_base) {
    if (n < 1) throw ValidationError("sample_trajectories: n must be >= 1");
    std::vector<Trajectory> out;
    for (int i = 0; i < n; ++i) {
        ChatRequest request;
        request.system = prompts::kTrajectorySystem;
        request.user = prompts::render(prompts::kTrajectoryHuman, {{"case_prompt", record.prompt}});
        request.temperature = 0.8;  // stochastic decoding
        request.sample_seed = seed_base + static_cast<std::uint64_t>(i);
        ChatResponse response;
        try {
            response = provider.chat(request);
        } catch (const ProviderError& e) {
            throw ProviderError("trajectory sampling for " + record.case_id + " failed at " +
                                std::to_string(out.size()) + "/" + std::to_string(n) + ": " +
                                e.what());
        }
        Trajectory t = parse_trajectory_reply(record.case_id, response.text);
        t.outcome = answers_match(t.final_answer, record.gold_answer, &provider)
                        ? Outcome::Success
                        : Outcome::Failure;
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

std::string trajectory_text(const Trajectory& t) {
    std::string out;
    for (std::size_t i = 0; i < t.steps.size(); ++i)
        out += std::to_string(i + 1) + ". " + t.steps[i] + "\n";
    out += "FINAL ANSWER: " + t.final_answer;
    return out;
}

std::string trajectories_text(const std::vector<Trajectory>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out += "## Trajectory " + std::to_string(i + 1) + "\n" + trajectory_text(ts[i]) + "\n\n";
    }
    return out;
}

std::string case_info_text(const CaseRecord& record) {
    return "Case " + record.case_id + " (" + record.task_type + ")\n" + record.prompt;
}

Experience experience_from_json(const nlohmann::json& j, Polarity polarity) {
    Experience e;
    e.condition = j.at("condition").get<std::string>();
    e.content = j.at("content").get<std::string>();
    e.task_type = normalize_task_type(j.at("task_type").get<std::string>());
    e.evidence = j.value("evidence", "");
    e.polarity = polarity;
    e.quality = 0.5;  // placeholder until reliability validation runs
    return e;
}

}  // namespace

std::vector<Experience> extract_indications(const CaseRecord& record,
                                            const std::vector<Trajectory>& successes,
                                            ChatProvider& provider) {
    if (successes.empty())
        throw ValidationError("extract_indications requires at least one success");

    ChatRequest request;
    request.system = prompts::kIndicationSystem;
    request.user = prompts::render(prompts::kIndicationHuman,
                                   {{"case_info", case_info_text(record)},
                                    {"trajectory", trajectories_text(successes)}});
    request.temperature = 0.0;

    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {  // one repair retry
        ChatResponse response = provider.chat(request);
        auto parsed = parse_json_lenient(response.text);
        if (!parsed || !parsed->is_array() || parsed->empty() || parsed->size() > 2) {
            last_problem = "expected a JSON array of 1-2 experiences";
            continue;
        }
        try {
            std::vector<Experience> out;
            for (const auto& item : *parsed)
                out.push_back(experience_from_json(item, Polarity::Indication));
            return out;
        } catch (const nlohmann::json::exception& e) {
            last_problem = e.what();
        }
    }
    throw ParseError("indication extraction for " + record.case_id +
                     " failed after retry: " + last_problem);
}

DivergenceReport analyze_divergence(const Trajectory& success, const Trajectory& failure,
                                    const std::string& gold, ChatProvider& provider) {
    if (success.outcome != Outcome::Success)
        throw ValidationError("analyze_divergence: first trajectory must be a success");
    if (failure.outcome != Outcome::Failure)
        throw ValidationError("analyze_divergence: second trajectory must be a failure");

    ChatRequest request;
    request.system = prompts::kDivergenceSystem;
    request.user = prompts::render(prompts::kDivergenceHuman,
                                   {{"success_trajectory", trajectory_text(success)},
                                    {"failure_trajectory", trajectory_text(failure)},
                                    {"gold_answer", gold},
                                    {"wrong_answer", failure.final_answer}});
    request.temperature = 0.0;

    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse response = provider.chat(request);
        auto parsed = parse_json_lenient(response.text);
        if (!parsed || !parsed->is_object()) {
            last_problem = "expected a JSON object";
            continue;
        }
        try {
            DivergenceReport report;
            report.divergence_step = parsed->at("divergence_step").get<int>();
            report.success_decision = parsed->at("success_decision").get<std::string>();
            report.failure_decision = parsed->at("failure_decision").get<std::string>();
            report.why_fatal = parsed->at("why_fatal").get<std::string>();
            report.consequence = parsed->at("consequence").get<std::string>();
            if (report.divergence_step < 1 ||
                report.divergence_step > static_cast<int>(failure.steps.size())) {
                last_problem = "divergence_step " + std::to_string(report.divergence_step) +
                               " outside 1.." + std::to_string(failure.steps.size());
                continue;
            }
            return report;
        } catch (const nlohmann::json::exception& e) {
            last_problem = e.what();
        }
    }
    throw ParseError("divergence analysis failed after retry: " + last_problem);
}

Trajectory pair_failure_with_success(const Trajectory& failure,
                                     const std::vector<Trajectory>& successes,
                                     EmbeddingProvider& embed) {
    if (successes.empty())
        throw ValidationError("pair_failure_with_success requires at least one success");
    if (successes.size() == 1) return successes.front();

    std::vector<std::string> texts;
    texts.push_back(trajectory_text(failure));
    for (const auto& s : successes) texts.push_back(trajectory_text(s));
    std::vector<EmbeddingVector> vectors = embed.embed(texts);

    std::size_t best = 0;
    double best_cosine = -2.0;
    for (std::size_t i = 0; i < successes.size(); ++i) {
        double c = vectors[0].cosine(vectors[i + 1]);
        if (c > best_cosine) {  // ties keep the earliest index
            best_cosine = c;
            best = i;
        }
    }
    return successes[best];
}

Experience extract_contraindication(const CaseRecord& record, const DivergenceReport& divergence,
                                    const Trajectory& failure, const Trajectory& success,
                                    ChatProvider& provider) {
    if (divergence.divergence_step < 1 ||
        divergence.divergence_step > static_cast<int>(failure.steps.size()))
        throw ValidationError("extract_contraindication: divergence step out of range");

    nlohmann::ordered_json dj;
    dj["divergence_step"] = divergence.divergence_step;
    dj["success_decision"] = divergence.success_decision;
    dj["failure_decision"] = divergence.failure_decision;
    dj["why_fatal"] = divergence.why_fatal;
    dj["consequence"] = divergence.consequence;

    ChatRequest request;
    request.system = prompts::kContraindicationSystem;
    request.user = prompts::render(prompts::kContraindicationHuman,
                                   {{"case_info", case_info_text(record)},
                                    {"reference_analysis", record.gold_answer},
                                    {"divergence", dump_canonical(dj)},
                                    {"failure_trajectory", trajectory_text(failure)},
                                    {"success_trajectory", trajectory_text(success)}});
    request.temperature = 0.0;

    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResponse response = provider.chat(request);
        auto parsed = parse_json_lenient(response.text);
        if (!parsed || !parsed->is_object()) {
            last_problem = "expected a JSON object";
            continue;
        }
        try {
            return experience_from_json(*parsed, Polarity::Contraindication);
        } catch (const nlohmann::json::exception& e) {
            last_problem = e.what();
        }
    }
    throw ParseError("contraindication extraction for " + record.case_id +
                     " failed after retry: " + last_problem);
}

std::vector<Experience> deduplicate(const std::vector<Experience>& experiences,
                                    EmbeddingProvider& embed, double threshold) {
    if (experiences.size() < 2) return experiences;
    std::vector<std::string> texts;
    texts.reserve(experiences.size());
    for (const auto& e : experiences) texts.push_back(node_text(e));
    std::vector<EmbeddingVector> vectors = embed.embed(texts);

    std::vector<Experience> kept;
    std::vector<std::size_t> kept_index;
    for (std::size_t i = 0; i < experiences.size(); ++i) {
        bool duplicate = false;
        for (std::size_t k : kept_index) {
            if (experiences[k].polarity != experiences[i].polarity) continue;
            if (vectors[k].cosine(vectors[i]) >= threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            kept.push_back(experiences[i]);
            kept_index.push_back(i);
        }
    }
    return kept;
}

ErvResult erv_quality(int successes, int n_erv) {
    if (n_erv < 1) throw ValidationError("erv_quality: n_erv must be >= 1");
    if (successes < 0 || successes > n_erv)
        throw ValidationError("erv_quality: successes outside 0..n_erv");
    ErvResult result;
    result.successes = successes;
    result.trials = n_erv;
    result.accuracy = static_cast<double>(successes) / n_erv;
    double mu = std::ceil(n_erv / 2.0) / n_erv;
    result.q0 = 1.0 / (1.0 + std::exp(-(result.accuracy - mu)));
    return result;
}

ErvResult run_erv(const Experience& e, std::span<const CaseRecord> held_out,
                  ChatProvider& provider, int n_erv) {
    if (static_cast<int>(held_out.size()) < n_erv)
        throw ValidationError("run_erv: held-out pool smaller than n_erv");
    const Experience injected[] = {e};
    int successes = 0;
    for (int trial = 0; trial < n_erv; ++trial) {
        const CaseRecord& record = held_out[trial];
        ChatRequest request;
        request.system = prompts::kAnswerSystem;
        request.user = prompts::render(prompts::kAnswerHuman,
                                       {{"injection", render_injection(injected)},
                                        {"case_prompt", record.prompt}});
        request.temperature = 0.0;
        ChatResponse response;
        try {
            response = provider.chat(request);
        } catch (const ProviderError& err) {
            throw ProviderError("reliability trial " + std::to_string(trial + 1) + "/" +
                                std::to_string(n_erv) + " for " + e.id.value + ": " + err.what());
        }
        if (answers_match(response.text, record.gold_answer, &provider)) ++successes;
    }
    ErvResult result = erv_quality(successes, n_erv);
    result.experience_id = e.id;
    return result;
}

ParsedStructure parse_entities_and_edges(const Experience& e, ChatProvider& provider) {
    ParsedStructure out;

    ChatRequest entity_request;
    entity_request.system = prompts::kEntitySystem;
    entity_request.user = prompts::render(prompts::kEntityHuman,
                                          {{"condition", e.condition}, {"content", e.content}});
    entity_request.temperature = 0.0;

    nlohmann::json entities_json;
    std::string last_problem;
    bool parsed_ok = false;
    for (int attempt = 0; attempt < 2 && !parsed_ok; ++attempt) {
        ChatResponse response = provider.chat(entity_request);
        auto parsed = parse_json_lenient(response.text);
        if (parsed && parsed->is_object() && parsed->contains("core_entities") &&
            (*parsed)["core_entities"].is_array()) {
            entities_json = (*parsed)["core_entities"];
            parsed_ok = true;
        } else {
            last_problem = "expected object with core_entities array";
        }
    }
    if (!parsed_ok)
        throw ParseError("entity extraction for " + e.id.value +
                         " failed after retry: " + last_problem);

    for (const auto& item : entities_json) {
        std::string raw, role_raw;
        try {
            raw = item.at("entity").get<std::string>();
            role_raw = item.at("role").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            out.warnings.push_back(e.id.value + ": malformed entity entry dropped");
            continue;
        }
        auto role = entity_role_from_string(role_raw);
        if (!role) {
            out.warnings.push_back(e.id.value + ": unknown role \"" + role_raw + "\" dropped");
            continue;
        }
        std::string why;
        auto entity = normalize_entity(raw, *role, &why);
        if (!entity) {
            out.warnings.push_back(e.id.value + ": " + why);
            continue;
        }
        if (std::find(out.entities.begin(), out.entities.end(), *entity) == out.entities.end())
            out.entities.push_back(std::move(*entity));
    }

    nlohmann::ordered_json core_json = nlohmann::ordered_json::array();
    for (const auto& entity : out.entities) {
        nlohmann::ordered_json ej;
        ej["entity"] = entity.surface;
        ej["role"] = to_string(entity.role);
        core_json.push_back(std::move(ej));
    }

    ChatRequest edge_request;
    edge_request.system = prompts::kRoleEdgeSystem;
    edge_request.user = prompts::render(prompts::kRoleEdgeHuman,
                                        {{"core_entities_json", dump_canonical(core_json)},
                                         {"condition", e.condition},
                                         {"content", e.content}});
    edge_request.temperature = 0.0;

    nlohmann::json edges_json;
    parsed_ok = false;
    for (int attempt = 0; attempt < 2 && !parsed_ok; ++attempt) {
        ChatResponse response = provider.chat(edge_request);
        auto parsed = parse_json_lenient(response.text);
        if (parsed && parsed->is_object() && parsed->contains("entity_edges") &&
            (*parsed)["entity_edges"].is_array()) {
            edges_json = (*parsed)["entity_edges"];
            parsed_ok = true;
        } else {
            last_problem = "expected object with entity_edges array";
        }
    }
    if (!parsed_ok)
        throw ParseError("role-edge extraction for " + e.id.value +
                         " failed after retry: " + last_problem);

    auto find_entity = [&](const std::string& surface) -> const Entity* {
        std::string n = normalize_text(surface);
        for (const auto& entity : out.entities)
            if (entity.surface == n) return &entity;
        return nullptr;
    };
    for (const auto& item : edges_json) {
        std::string from_raw, to_raw;
        try {
            from_raw = item.at("from_entity").get<std::string>();
            to_raw = item.at("to_entity").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            out.warnings.push_back(e.id.value + ": malformed entity edge dropped");
            continue;
        }
        const Entity* from = find_entity(from_raw);
        const Entity* to = find_entity(to_raw);
        if (!from || !to) {
            out.warnings.push_back(e.id.value + ": edge references unknown entity \"" +
                                   (from ? to_raw : from_raw) + "\"; dropped");
            continue;
        }
        if (*from == *to) {
            out.warnings.push_back(e.id.value + ": self-loop on \"" + from->surface +
                                   "\" dropped");
            continue;
        }
        if (!validate_role_edge(*from, *to)) {
            out.warnings.push_back(e.id.value + ": role edge " + to_string(from->role) + "->" +
                                   to_string(to->role) + " not allowed; dropped");
            continue;
        }
        RoleEdge edge{*from, *to};
        if (std::find(out.role_edges.begin(), out.role_edges.end(), edge) == out.role_edges.end())
            out.role_edges.push_back(std::move(edge));
    }
    for (const auto& w : out.warnings) log_warn(w);
    return out;
}

namespace {

std::string make_experience_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "exp_%04zu", index);
    return buf;
}

}  // namespace

BuildResult build_memory(std::vector<CaseRecord> cases, const ProviderSet& providers,
                         const ConstructionConfig& cfg, std::uint64_t master_seed) {
    if (cases.empty()) throw ValidationError("build_memory: case list is empty");
    if (auto bad = validate(cfg); !bad.empty()) throw ValidationError(bad.front());
    if (!providers.generation) throw ValidationError("build_memory: generation provider missing");
    if (!providers.embedding) throw ValidationError("build_memory: embedding provider missing");
    ChatProvider& generation = *providers.generation;
    EmbeddingProvider& embedding = *providers.embedding;

    std::sort(cases.begin(), cases.end(),
              [](const CaseRecord& a, const CaseRecord& b) { return a.case_id < b.case_id; });

    BuildResult result;
    BuildReport& report = result.report;
    std::vector<Experience> extracted;

    for (std::size_t case_index = 0; case_index < cases.size(); ++case_index) {
        const CaseRecord& record = cases[case_index];
        try {
            std::vector<Trajectory> trajectories = sample_trajectories(
                record, generation, cfg.n_traj, master_seed + 1000 * case_index);
            std::vector<Trajectory> successes, failures;
            for (auto& t : trajectories)
                (t.outcome == Outcome::Success ? successes : failures).push_back(std::move(t));

            if (successes.empty()) {
                report.skipped_cases.push_back(record.case_id);
                report.warnings.push_back(record.case_id +
                                          ": no successful trajectory; case skipped");
                log_warn(report.warnings.back());
                ++report.cases_processed;
                continue;
            }
            for (auto& e : extract_indications(record, successes, generation)) {
                ++report.indications;
                extracted.push_back(std::move(e));
            }
            for (const Trajectory& failure : failures) {
                Trajectory paired = pair_failure_with_success(failure, successes, embedding);
                DivergenceReport divergence =
                    analyze_divergence(paired, failure, record.gold_answer, generation);
                Experience contra =
                    extract_contraindication(record, divergence, failure, paired, generation);
                ++report.contraindications;
                extracted.push_back(std::move(contra));
            }
            ++report.cases_processed;
        } catch (const GsemError& e) {
            report.skipped_cases.push_back(record.case_id);
            report.warnings.push_back(record.case_id + ": " + e.what());
            log_warn(report.warnings.back());
        }
    }

    if (extracted.empty())
        throw GsemError("build_memory: no experiences survived extraction");

    std::vector<Experience> kept = deduplicate(extracted, embedding, cfg.dedup_threshold);
    report.dropped_duplicates = static_cast<int>(extracted.size() - kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        kept[i].id = ExperienceId{make_experience_id(i + 1)};

    // Reliability trials reuse the build cases as the held-out pool.
    int n_erv = cfg.n_erv;
    if (static_cast<int>(cases.size()) < n_erv) {
        n_erv = static_cast<int>(cases.size());
        report.warnings.push_back("held-out pool smaller than n_erv; clamped to " +
                                  std::to_string(n_erv));
        log_warn(report.warnings.back());
    }

    std::vector<ExperienceNode> nodes;
    for (Experience& e : kept) {
        ParsedStructure structure = parse_entities_and_edges(e, generation);
        for (auto& w : structure.warnings) report.warnings.push_back(w);
        ExperienceNode node;
        node.core_entities = std::move(structure.entities);
        node.role_edges = std::move(structure.role_edges);
        node.experience = e;
        nodes.push_back(std::move(node));
    }
    for (ExperienceNode& node : nodes) {
        ErvResult erv = run_erv(node.experience, cases, generation, n_erv);
        node.experience.quality = erv.q0;
    }

    std::vector<std::string> texts;
    texts.reserve(nodes.size());
    for (const auto& node : nodes) texts.push_back(node_text(node.experience));
    std::vector<EmbeddingVector> vectors = embedding.embed(texts);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        nodes[i].embedding = std::move(vectors[i].values);

    for (auto& node : nodes) result.graph.add_node(std::move(node));
    if (result.graph.nodes().size() >= 2) {
        BuildEdgesResult edges =
            build_edges(result.graph, cfg.similarity_weights, cfg.theta_edge, generation);
        report.edges = edges.edges_created;
    }

    report.nodes = static_cast<int>(result.graph.nodes().size());
    double q_sum = 0.0;
    for (const auto& [id, node] : result.graph.nodes()) q_sum += node.experience.quality;
    report.mean_q = report.nodes ? q_sum / report.nodes : 0.0;
    return result;
}

std::vector<CaseRecord> load_cases(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read dataset file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root = parse_json(text, "dataset " + path.string());
    if (!root.is_array()) throw ParseError("dataset " + path.string() + ": expected a JSON array");
    std::vector<CaseRecord> cases;
    std::set<std::string> seen;
    for (const auto& item : root) {
        CaseRecord record;
        try {
            record.case_id = item.at("case_id").get<std::string>();
            record.prompt = item.at("prompt").get<std::string>();
            record.gold_answer = item.at("gold_answer").get<std::string>();
            record.task_type = normalize_task_type(item.at("task_type").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("dataset " + path.string() + ": " + e.what());
        }
        if (!seen.insert(record.case_id).second)
            throw ValidationError("dataset " + path.string() + ": duplicate case_id " +
                                  record.case_id);
        cases.push_back(std::move(record));
    }
    return cases;
}

}  // namespace gsem
