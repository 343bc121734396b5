// gsem CLI: build a memory from cases, query it, run feedback episodes,
// drive the synthetic evolution simulator, and inspect/export snapshots.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsem/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gsem - graph-based self-evolving experience memory"};
    app.require_subcommand(1);

    std::string snapshot, dataset, config, query, case_file, scenario, out_path;
    std::string policy = "greedy";
    std::string format = "dot";
    std::string layer = "exp";
    std::string episode_log;
    std::string case_id;

    auto* build = app.add_subcommand("build", "Build a memory snapshot from a case dataset");
    build->add_option("--dataset", dataset, "JSON array of case records")->required();
    build->add_option("--config", config, "Engine config file")->required();
    build->add_option("--out", out_path, "Snapshot output path")->required();

    auto* retrieve = app.add_subcommand("retrieve", "Query a snapshot; prints the trace JSON");
    retrieve->add_option("--snapshot", snapshot, "Snapshot path")->required();
    retrieve->add_option("--query", query, "Query text")->required();
    retrieve->add_option("--config", config, "Engine config file")->required();
    retrieve->add_option("--policy", policy, "Action policy: greedy|llm");

    auto* episode = app.add_subcommand(
        "episode", "Run retrieve -> answer -> feedback -> evolve on one case");
    episode->add_option("--snapshot", snapshot, "Snapshot path (rewritten in place)")->required();
    episode->add_option("--case", case_file, "Case file (object or array)")->required();
    episode->add_option("--config", config, "Engine config file")->required();
    episode->add_option("--policy", policy, "Action policy: greedy|llm");
    episode->add_option("--log", episode_log, "Episode log path (default <snapshot>.episodes.jsonl)");
    episode->add_option("--case-id", case_id, "Case to pick when the file holds several");

    auto* simulate = app.add_subcommand("simulate", "Run the synthetic evolution scenario");
    simulate->add_option("--scenario", scenario, "Scenario JSON file")->required();
    simulate->add_option("--config", config, "Engine config file")->required();
    simulate->add_option("--out", out_path, "Per-episode CSV output path")->required();

    auto* stats = app.add_subcommand("stats", "Print snapshot statistics");
    stats->add_option("--snapshot", snapshot, "Snapshot path")->required();

    auto* export_cmd = app.add_subcommand("export", "Export GraphViz dot text");
    export_cmd->add_option("--snapshot", snapshot, "Snapshot path")->required();
    export_cmd->add_option("--format", format, "Output format (dot)");
    export_cmd->add_option("--layer", layer, "exp (experience layer) or entity");
    export_cmd->add_option("--id", case_id, "Experience id for --layer entity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : gsem::kExitUsage;
    }

    if (build->parsed()) return gsem::cmd_build(dataset, config, out_path, std::cout, std::cerr);
    if (retrieve->parsed())
        return gsem::cmd_retrieve(snapshot, query, config, policy, std::cout, std::cerr);
    if (episode->parsed()) {
        std::string log_path =
            episode_log.empty() ? snapshot + ".episodes.jsonl" : episode_log;
        std::optional<std::string> selected;
        if (!case_id.empty()) selected = case_id;
        return gsem::cmd_episode(snapshot, case_file, config, policy, log_path, selected,
                                 std::cout, std::cerr);
    }
    if (simulate->parsed())
        return gsem::cmd_simulate(scenario, config, out_path, std::cout, std::cerr);
    if (stats->parsed()) return gsem::cmd_stats(snapshot, std::cout, std::cerr);
    if (export_cmd->parsed()) {
        std::optional<std::string> id;
        if (!case_id.empty()) id = case_id;
        return gsem::cmd_export(snapshot, format, layer, id, std::cout, std::cerr);
    }
    return gsem::kExitUsage;
}
