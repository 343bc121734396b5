#include "gsem/harness.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <ostream>

#include "gsem/error.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/prompts.hpp"
#include "gsem/simulate.hpp"

namespace gsem {

namespace {

int exit_code_for(const std::exception& e, std::ostream& err, const std::string& context) {
    err << "gsem: " << context << ": " << e.what() << "\n";
    if (dynamic_cast<const ProviderError*>(&e)) return kExitProvider;
    return kExitUsage;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GsemError("cannot write file: " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

nlohmann::ordered_json episode_record_to_json(const EpisodeRecord& record) {
    nlohmann::ordered_json root;
    root["task_id"] = record.task_id;
    auto& retrieved = root["retrieved"] = nlohmann::ordered_json::array();
    for (const auto& id : record.retrieved) retrieved.push_back(id.value);
    root["answer"] = record.answer;
    root["correct"] = record.correct;
    root["delta"] = record.delta;
    root["trace"] = trace_to_json(record.trace);
    root["report"] = report_to_json(record.report);
    return root;
}

EpisodeRecord episode_record_from_json(const nlohmann::json& j) {
    EpisodeRecord record;
    try {
        record.task_id = j.at("task_id").get<std::string>();
        for (const auto& id : j.at("retrieved"))
            record.retrieved.push_back(ExperienceId{id.get<std::string>()});
        record.answer = j.at("answer").get<std::string>();
        record.correct = j.at("correct").get<bool>();
        record.delta = j.at("delta").get<double>();
        record.trace = trace_from_json(j.at("trace"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("episode record: ") + e.what());
    }
    return record;
}

int cmd_build(const std::filesystem::path& dataset, const std::filesystem::path& config,
              const std::filesystem::path& out_snapshot, std::ostream& out, std::ostream& err) {
    EngineConfig cfg;
    OwnedProviders providers;
    std::optional<BuildResult> result;
    try {
        cfg = load_engine_config(config);
        providers = make_providers(cfg);
        std::vector<CaseRecord> cases = load_cases(dataset);
        result = build_memory(std::move(cases), providers.set(), cfg.construction,
                              cfg.master_seed);
        save_snapshot_file(result->graph, out_snapshot);
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "build");
    }
    const BuildReport& report = result->report;
    out << "snapshot written: " << out_snapshot.string() << "\n"
        << "cases processed: " << report.cases_processed << "\n"
        << "experiences: " << report.nodes << " (indications " << report.indications
        << ", contraindications " << report.contraindications << ", duplicates dropped "
        << report.dropped_duplicates << ")\n"
        << "edges: " << report.edges << "\n"
        << "mean quality: " << format_real(report.mean_q) << "\n";
    for (const auto& skipped : report.skipped_cases) out << "skipped case: " << skipped << "\n";
    return kExitOk;
}

namespace {

// Builds the policy selected by --policy; llm requires a configured
// policy provider.
std::unique_ptr<ActionPolicy> make_policy(const std::string& name, const EngineConfig& cfg,
                                          const ProviderSet& providers) {
    if (name == "greedy")
        return std::make_unique<GreedyPolicy>(cfg.retrieval.collect_threshold);
    if (name == "llm") {
        if (!providers.policy)
            throw ValidationError("--policy llm requires a configured policy provider");
        return std::make_unique<LlmPolicy>(*providers.policy, cfg.retrieval.collect_threshold);
    }
    throw ValidationError("unknown policy: " + name + " (expected greedy or llm)");
}

}  // namespace

int cmd_retrieve(const std::filesystem::path& snapshot, const std::string& query,
                 const std::filesystem::path& config, const std::string& policy,
                 std::ostream& out, std::ostream& err) {
    try {
        EngineConfig cfg = load_engine_config(config);
        OwnedProviders providers = make_providers(cfg);
        MemoryGraph g = load_snapshot_file(snapshot);
        if (g.nodes().empty()) throw ValidationError("empty memory");
        std::unique_ptr<ActionPolicy> action_policy = make_policy(policy, cfg, providers.set());
        RetrievalResult result =
            retrieve(g, query, providers.set(), cfg.retrieval, *action_policy);
        out << dump_canonical(trace_to_json(result.trace)) << "\n";
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "retrieve");
    }
    return kExitOk;
}

namespace {

CaseRecord load_single_case(const std::filesystem::path& path,
                            const std::optional<std::string>& case_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GsemError("cannot read case file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json root = parse_json(text, "case file " + path.string());

    auto from_json = [&](const nlohmann::json& j) {
        CaseRecord record;
        record.case_id = j.at("case_id").get<std::string>();
        record.prompt = j.at("prompt").get<std::string>();
        record.gold_answer = j.at("gold_answer").get<std::string>();
        record.task_type = normalize_task_type(j.at("task_type").get<std::string>());
        return record;
    };
    try {
        if (root.is_object()) return from_json(root);
        if (root.is_array()) {
            if (!case_id && root.size() == 1) return from_json(root.at(0));
            if (!case_id)
                throw ValidationError("case file holds several cases; pass --case-id");
            for (const auto& item : root)
                if (item.at("case_id").get<std::string>() == *case_id) return from_json(item);
            throw ValidationError("case id not found in file: " + *case_id);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("case file " + path.string() + ": " + e.what());
    }
    throw ParseError("case file " + path.string() + ": expected object or array");
}

}  // namespace

int cmd_episode(const std::filesystem::path& snapshot, const std::filesystem::path& case_file,
                const std::filesystem::path& config, const std::string& policy,
                const std::filesystem::path& episode_log,
                const std::optional<std::string>& case_id, std::ostream& out,
                std::ostream& err) {
    std::string stage = "setup";
    try {
        stage = "config";
        EngineConfig cfg = load_engine_config(config);
        OwnedProviders providers = make_providers(cfg);
        if (!providers.generation)
            throw ValidationError("episode requires a configured generation provider");

        stage = "load";
        MemoryGraph g = load_snapshot_file(snapshot);
        if (g.nodes().empty()) throw ValidationError("empty memory");
        CaseRecord record = load_single_case(case_file, case_id);

        stage = "retrieve";
        std::unique_ptr<ActionPolicy> action_policy = make_policy(policy, cfg, providers.set());
        RetrievalResult retrieved =
            retrieve(g, record.prompt, providers.set(), cfg.retrieval, *action_policy);

        stage = "answer";
        ChatRequest request;
        request.system = prompts::kAnswerSystem;
        request.user = prompts::render(
            prompts::kAnswerHuman,
            {{"injection", render_injection(retrieved.experiences)},
             {"case_prompt", record.prompt}});
        request.temperature = 0.0;
        std::string answer = providers.generation->chat(request).text;
        bool correct = answers_match(answer, record.gold_answer, providers.generation.get());

        stage = "feedback";
        FeedbackEvent event;
        event.task_id = record.case_id;
        event.delta = delta_from_outcome(correct);
        event.trace = retrieved.trace;
        UpdateReport report = apply_feedback(g, event, cfg.evolution);

        stage = "save";
        save_snapshot_file(g, snapshot);
        EpisodeRecord episode;
        episode.task_id = record.case_id;
        episode.retrieved = retrieved.trace.collected;
        episode.answer = answer;
        episode.correct = correct;
        episode.delta = event.delta;
        episode.trace = retrieved.trace;
        episode.report = report;
        std::ofstream log(episode_log, std::ios::binary | std::ios::app);
        if (!log) throw GsemError("cannot append episode log: " + episode_log.string());
        log << dump_canonical(episode_record_to_json(episode), -1) << "\n";

        out << "task: " << record.case_id << "\n"
            << "retrieved: " << retrieved.trace.collected.size() << "\n"
            << "correct: " << (correct ? "yes" : "no") << "\n"
            << "delta: " << format_real(event.delta) << "\n"
            << "nodes updated: " << report.node_updates.size() << "\n"
            << "edges updated: " << report.edge_updates.size() << "\n";
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "episode (stage " + stage + ")");
    }
    return kExitOk;
}

int cmd_simulate(const std::filesystem::path& scenario_path,
                 const std::filesystem::path& config, const std::filesystem::path& out_csv,
                 std::ostream& out, std::ostream& err) {
    try {
        EngineConfig cfg = load_engine_config(config);
        SyntheticScenario scenario = load_scenario(scenario_path);
        SimulationResult result = run_simulation(scenario, cfg);
        write_text_atomic(out_csv, simulation_csv(result.rows));
        const SimulationRow& last = result.rows.back();
        out << "episodes: " << scenario.n_episodes << "\n"
            << "final mean_q_good: " << format_real(last.mean_q_good) << "\n"
            << "final mean_q_bad: " << format_real(last.mean_q_bad) << "\n"
            << "final spearman: " << format_real(last.spearman) << "\n"
            << "csv written: " << out_csv.string() << "\n";
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "simulate");
    }
    return kExitOk;
}

int cmd_stats(const std::filesystem::path& snapshot, std::ostream& out, std::ostream& err) {
    try {
        MemoryGraph g = load_snapshot_file(snapshot);
        int indications = 0, contraindications = 0;
        std::array<int, 10> q_bins{}, w_bins{};
        double q_sum = 0.0;
        auto bin_of = [](double v) { return std::min(static_cast<int>(v * 10.0), 9); };
        for (const auto& [id, node] : g.nodes()) {
            (node.experience.polarity == Polarity::Indication ? indications
                                                              : contraindications)++;
            q_sum += node.experience.quality;
            ++q_bins[bin_of(node.experience.quality)];
        }
        for (const auto& [key, edge] : g.edges()) ++w_bins[bin_of(effective_weight(edge))];

        out << "nodes: " << g.nodes().size() << "\n"
            << "edges: " << g.edges().size() << "\n"
            << "indications: " << indications << "\n"
            << "contraindications: " << contraindications << "\n"
            << "entities: " << g.entity_index().size() << "\n"
            << "episode_counter: " << g.episode_counter() << "\n"
            << "mean_q: "
            << format_real(g.nodes().empty() ? 0.0 : q_sum / g.nodes().size()) << "\n";
        auto print_bins = [&](const char* name, const std::array<int, 10>& bins) {
            out << name << ":";
            for (int count : bins) out << " " << count;
            out << "\n";
        };
        print_bins("q_histogram", q_bins);
        print_bins("w_histogram", w_bins);
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "stats");
    }
    return kExitOk;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

int cmd_export(const std::filesystem::path& snapshot, const std::string& format,
               const std::string& layer, const std::optional<std::string>& experience_id,
               std::ostream& out, std::ostream& err) {
    try {
        if (format != "dot") throw ValidationError("unknown export format: " + format);
        MemoryGraph g = load_snapshot_file(snapshot);
        if (layer == "exp") {
            out << "digraph experience_layer {\n";
            for (const auto& [id, node] : g.nodes()) {
                char penwidth[32];
                std::snprintf(penwidth, sizeof(penwidth), "%.3f",
                              0.5 + 3.0 * node.experience.quality);
                out << "  \"" << dot_escape(id.value) << "\" [penwidth=" << penwidth
                    << ", label=\"" << dot_escape(id.value) << "\"];\n";
            }
            for (const auto& [key, edge] : g.edges()) {
                out << "  \"" << dot_escape(key.first.value) << "\" -> \""
                    << dot_escape(key.second.value) << "\" [label=\""
                    << format_real(effective_weight(edge)) << "\"];\n";
            }
            out << "}\n";
        } else if (layer == "entity") {
            if (!experience_id)
                throw ValidationError("--layer entity requires --id <experience id>");
            const ExperienceNode& node = g.node(ExperienceId{*experience_id});
            out << "digraph entity_layer {\n";
            for (const auto& entity : node.core_entities) {
                out << "  \"" << dot_escape(entity.surface) << "\" [label=\""
                    << dot_escape(entity.surface) << "\\n(" << to_string(entity.role)
                    << ")\"];\n";
            }
            for (const auto& edge : node.role_edges) {
                out << "  \"" << dot_escape(edge.from.surface) << "\" -> \""
                    << dot_escape(edge.to.surface) << "\";\n";
            }
            out << "}\n";
        } else {
            throw ValidationError("unknown layer: " + layer + " (expected exp or entity)");
        }
    } catch (const std::exception& e) {
        return exit_code_for(e, err, "export");
    }
    return kExitOk;
}

MemoryGraph replay_episode_log(MemoryGraph initial, const std::filesystem::path& episode_log,
                               const EvolutionConfig& cfg) {
    std::ifstream in(episode_log, std::ios::binary);
    if (!in) throw GsemError("cannot read episode log: " + episode_log.string());
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json j =
            parse_json(line, "episode log line " + std::to_string(line_number));
        EpisodeRecord record = episode_record_from_json(j);
        FeedbackEvent event;
        event.task_id = record.task_id;
        event.delta = record.delta;
        event.trace = record.trace;
        apply_feedback(initial, event, cfg);
        // Each live episode persists the snapshot before the next one
        // loads it; the round-trip keeps replayed reals on the same
        // 9-decimal grid as the file chain.
        initial = load_snapshot(save_snapshot(initial));
    }
    return initial;
}

}  // namespace gsem
