#pragma once
// Command implementations behind the CLI: build, retrieve, episode,
// simulate, stats, export, plus episode-log replay. Commands return
// process exit codes (0 ok, 2 usage/config/data, 3 provider failure).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "gsem/config.hpp"
#include "gsem/construction.hpp"
#include "gsem/evolution.hpp"
#include "gsem/graph.hpp"
#include "gsem/retrieval.hpp"

namespace gsem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitProvider = 3;

struct EpisodeRecord {
    std::string task_id;
    std::vector<ExperienceId> retrieved;
    std::string answer;
    bool correct = false;
    double delta = 0.0;
    RetrievalTrace trace;
    UpdateReport report;
};

nlohmann::ordered_json episode_record_to_json(const EpisodeRecord& record);
EpisodeRecord episode_record_from_json(const nlohmann::json& j);

int cmd_build(const std::filesystem::path& dataset, const std::filesystem::path& config,
              const std::filesystem::path& out_snapshot, std::ostream& out, std::ostream& err);

int cmd_retrieve(const std::filesystem::path& snapshot, const std::string& query,
                 const std::filesystem::path& config, const std::string& policy,
                 std::ostream& out, std::ostream& err);

int cmd_episode(const std::filesystem::path& snapshot, const std::filesystem::path& case_file,
                const std::filesystem::path& config, const std::string& policy,
                const std::filesystem::path& episode_log,
                const std::optional<std::string>& case_id, std::ostream& out, std::ostream& err);

int cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& config,
                 const std::filesystem::path& out_csv, std::ostream& out, std::ostream& err);

int cmd_stats(const std::filesystem::path& snapshot, std::ostream& out, std::ostream& err);

int cmd_export(const std::filesystem::path& snapshot, const std::string& format,
               const std::string& layer, const std::optional<std::string>& experience_id,
               std::ostream& out, std::ostream& err);

// Re-applies every logged feedback event to the given starting graph;
// the result must byte-match the snapshot the episodes produced.
MemoryGraph replay_episode_log(MemoryGraph initial, const std::filesystem::path& episode_log,
                               const EvolutionConfig& cfg);

}  // namespace gsem
