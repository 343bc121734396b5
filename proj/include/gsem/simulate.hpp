#pragma once
// Synthetic evolution environment: planted experiences with known utility,
// episodes whose success probability tracks the mean utility of what was
// retrieved, and per-episode calibration statistics.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gsem/config.hpp"
#include "gsem/graph.hpp"

namespace gsem {

// mt19937_64 with all floating draws derived from raw 64-bit output, so
// streams are identical wherever the engine runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0,1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
};

struct SyntheticScenario {
    int n_good = 10;
    int n_bad = 10;
    double good_utility = 0.9;
    double bad_utility = 0.1;
    std::map<std::string, double> planted_utility;  // optional explicit overrides
    double p_correct_base = 0.5;
    double utility_gain = 2.0;
    int n_episodes = 200;
    std::uint64_t rng_seed = 42;
};

std::vector<std::string> validate(const SyntheticScenario& scenario);
SyntheticScenario load_scenario(const std::filesystem::path& path);

// Spearman rank correlation with average ranks for ties; 0.0 when either
// side is constant.
double spearman_rank_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct SimulationRow {
    int episode = 0;
    double mean_q_good = 0.0;
    double mean_q_bad = 0.0;
    double spearman = 0.0;
};

struct SimulationResult {
    MemoryGraph graph;
    std::map<ExperienceId, double> utility;
    std::vector<SimulationRow> rows;
};

// Planted nodes with seeded-random entities, embeddings and edges.
MemoryGraph build_synthetic_graph(const SyntheticScenario& scenario,
                                  std::map<ExperienceId, double>& utility_out);

SimulationResult run_simulation(const SyntheticScenario& scenario, const EngineConfig& cfg);

// "episode,mean_q_good,mean_q_bad,spearman" header + one row per episode.
std::string simulation_csv(const std::vector<SimulationRow>& rows);

}  // namespace gsem
