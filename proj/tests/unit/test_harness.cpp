#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gsem/config.hpp"
#include "gsem/error.hpp"
#include "gsem/harness.hpp"
#include "gsem/json_writer.hpp"
#include "gsem/simulate.hpp"
#include "support/oracles.hpp"

using namespace gsem;

TEST_SUITE_BEGIN("harness");

namespace {

const std::filesystem::path kFixtures{GSEM_FIXTURE_DIR};

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("gsem_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string golden(const std::string& name) { return slurp(kFixtures / "golden" / name); }

}  // namespace

TEST_CASE("engine config loads defaults and rejects bad values") {
    auto dir = temp_dir("config");
    SUBCASE("empty object keeps the built-in defaults") {
        std::ofstream(dir / "empty.json") << "{}";
        EngineConfig cfg = load_engine_config(dir / "empty.json");
        CHECK(cfg.construction.n_traj == 5);
        CHECK(cfg.construction.n_erv == 5);
        CHECK(cfg.construction.theta_edge == 0.35);
        CHECK(cfg.retrieval.k_neighbors == 5);
        CHECK(cfg.retrieval.t_max == 60);
        CHECK(cfg.evolution.eta_q == 0.1);
        CHECK(cfg.evolution.eta_w == 0.05);
        CHECK(cfg.evolution.rho == 0.8);
        CHECK(cfg.similarity_weights.alpha == 0.25);
    }
    SUBCASE("violated invariants name the rule") {
        std::ofstream(dir / "bad.json") << R"({"construction": {"n_traj": 0}})";
        CHECK_THROWS_WITH_AS(load_engine_config(dir / "bad.json"),
                             doctest::Contains("construction.n_traj"), ValidationError);
    }
    SUBCASE("unknown keys are rejected") {
        std::ofstream(dir / "typo.json") << R"({"retrival": {}})";
        CHECK_THROWS_WITH_AS(load_engine_config(dir / "typo.json"),
                             doctest::Contains("retrival"), ValidationError);
    }
    SUBCASE("weights not summing to one are rejected") {
        std::ofstream(dir / "weights.json")
            << R"({"similarity_weights": {"alpha": 0.5, "beta": 0.5, "gamma": 0.5, "delta": 0.5}})";
        CHECK_THROWS_AS(load_engine_config(dir / "weights.json"), ValidationError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_build produces the reviewed golden snapshot") {
    auto dir = temp_dir("build");
    std::ostringstream out, err;
    int code = cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                         dir / "snapshot.json", out, err);
    CAPTURE(err.str());
    REQUIRE(code == kExitOk);
    CHECK(slurp(dir / "snapshot.json") == golden("build_snapshot.json"));
    CHECK(out.str().find("experiences: 3 (indications 2, contraindications 1") !=
          std::string::npos);
    CHECK(out.str().find("edges: 2") != std::string::npos);

    // Byte-identical on a second run.
    std::ostringstream out2, err2;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot2.json", out2, err2) == kExitOk);
    CHECK(slurp(dir / "snapshot.json") == slurp(dir / "snapshot2.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_build error paths exit 2 with the offending path or rule") {
    auto dir = temp_dir("builderr");
    std::ostringstream out, err;
    SUBCASE("missing dataset file") {
        int code = cmd_build(dir / "missing.json", kFixtures / "mock_config.json",
                             dir / "s.json", out, err);
        CHECK(code == kExitUsage);
        CHECK(err.str().find("missing.json") != std::string::npos);
    }
    SUBCASE("config violating invariants") {
        std::ofstream(dir / "bad_config.json") << R"({"construction": {"dedup_threshold": 0.0}})";
        int code = cmd_build(kFixtures / "cases_small.json", dir / "bad_config.json",
                             dir / "s.json", out, err);
        CHECK(code == kExitUsage);
        CHECK(err.str().find("dedup_threshold") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_retrieve prints the golden trace deterministically") {
    auto dir = temp_dir("retrieve");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot.json", out, err) == kExitOk);

    std::ostringstream trace1, trace2, err1, err2;
    int code = cmd_retrieve(dir / "snapshot.json", "suspected sepsis with rising lactate",
                            kFixtures / "mock_config.json", "greedy", trace1, err1);
    REQUIRE(code == kExitOk);
    CHECK(trace1.str() == golden("retrieve_trace.json"));
    REQUIRE(cmd_retrieve(dir / "snapshot.json", "suspected sepsis with rising lactate",
                         kFixtures / "mock_config.json", "greedy", trace2, err2) == kExitOk);
    CHECK(trace1.str() == trace2.str());

    SUBCASE("llm policy without a provider is a config error") {
        std::ostringstream o, e;
        CHECK(cmd_retrieve(dir / "snapshot.json", "q", kFixtures / "mock_config.json", "llm", o,
                           e) == kExitUsage);
        CHECK(e.str().find("policy provider") != std::string::npos);
    }
    SUBCASE("empty snapshot is rejected") {
        MemoryGraph empty;
        save_snapshot_file(empty, dir / "empty.json");
        std::ostringstream o, e;
        CHECK(cmd_retrieve(dir / "empty.json", "q", kFixtures / "mock_config.json", "greedy", o,
                           e) == kExitUsage);
        CHECK(e.str().find("empty memory") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_episode applies feedback and keeps the log replayable") {
    auto dir = temp_dir("episode");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot.json", out, err) == kExitOk);
    std::string initial_bytes = slurp(dir / "snapshot.json");
    MemoryGraph initial = load_snapshot_file(dir / "snapshot.json");

    // Correct scripted answer: every collected node's quality rises.
    std::ostringstream eo, ee;
    int code = cmd_episode(dir / "snapshot.json", kFixtures / "case_alpha.json",
                           kFixtures / "episode_config.json", "greedy",
                           dir / "episodes.jsonl", std::nullopt, eo, ee);
    CAPTURE(ee.str());
    REQUIRE(code == kExitOk);
    CHECK(eo.str().find("correct: yes") != std::string::npos);

    MemoryGraph after = load_snapshot_file(dir / "snapshot.json");
    CHECK(after.episode_counter() == initial.episode_counter() + 1);

    // Recompute the expected quality updates from the logged trace.
    {
        std::ifstream log(dir / "episodes.jsonl");
        std::string line;
        REQUIRE(std::getline(log, line));
        EpisodeRecord record = episode_record_from_json(nlohmann::json::parse(line));
        REQUIRE_FALSE(record.retrieved.empty());
        CHECK(record.delta == 1.0);
        double denom = 0.0;
        for (std::size_t r = 0; r < record.retrieved.size(); ++r) denom += std::pow(0.8, r);
        for (std::size_t r = 0; r < record.retrieved.size(); ++r) {
            double credit = std::pow(0.8, r) / denom;
            double q_before = initial.node(record.retrieved[r]).experience.quality;
            double expected = std::min(1.0, q_before + 0.1 * credit * 1.0);
            double q_after = after.node(record.retrieved[r]).experience.quality;
            CHECK(q_after == doctest::Approx(expected).epsilon(1e-8));
            CHECK(q_after >= q_before);
        }
    }

    // A wrong answer pushes quality down symmetrically.
    std::ostringstream wo, we;
    REQUIRE(cmd_episode(dir / "snapshot.json", kFixtures / "case_alpha.json",
                        kFixtures / "episode_config_wrong.json", "greedy",
                        dir / "episodes.jsonl", std::nullopt, wo, we) == kExitOk);
    CHECK(wo.str().find("correct: no") != std::string::npos);
    MemoryGraph after_wrong = load_snapshot_file(dir / "snapshot.json");
    bool any_decrease = false;
    for (const auto& [id, node] : after_wrong.nodes()) {
        CHECK(node.experience.quality <= after.node(id).experience.quality + 1e-12);
        if (node.experience.quality < after.node(id).experience.quality) any_decrease = true;
    }
    CHECK(any_decrease);

    // Replaying the log over the initial snapshot reproduces the final
    // snapshot byte for byte.
    EngineConfig cfg = load_engine_config(kFixtures / "episode_config.json");
    MemoryGraph replayed = replay_episode_log(load_snapshot(GraphSnapshot{1, initial_bytes}),
                                              dir / "episodes.jsonl", cfg.evolution);
    CHECK(save_snapshot(replayed).payload == slurp(dir / "snapshot.json"));

    std::filesystem::remove_all(dir);
}

TEST_CASE("a failed episode leaves the snapshot untouched") {
    auto dir = temp_dir("episode_atomic");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot.json", out, err) == kExitOk);
    std::string before = slurp(dir / "snapshot.json");

    // A mute generation script makes the answer stage fail.
    std::ofstream(dir / "mute_script.json") << "[]";
    std::ofstream(dir / "mute_config.json") << R"({
      "providers": {
        "generation": {"kind": "scripted", "script_path": "mute_script.json"},
        "policy": {"kind": "none"},
        "embedding": {"kind": "trigram_hash"}
      }
    })";
    std::ostringstream eo, ee;
    int code = cmd_episode(dir / "snapshot.json", kFixtures / "case_alpha.json",
                           dir / "mute_config.json", "greedy", dir / "episodes.jsonl",
                           std::nullopt, eo, ee);
    CHECK(code == kExitProvider);
    CHECK(ee.str().find("stage answer") != std::string::npos);
    CHECK(slurp(dir / "snapshot.json") == before);
    CHECK_FALSE(std::filesystem::exists(dir / "episodes.jsonl"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_stats prints the golden summary") {
    auto dir = temp_dir("stats");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot.json", out, err) == kExitOk);
    std::ostringstream so, se;
    REQUIRE(cmd_stats(dir / "snapshot.json", so, se) == kExitOk);
    CHECK(so.str() == golden("stats.txt"));

    SUBCASE("empty graph yields all-zero histograms") {
        MemoryGraph empty;
        save_snapshot_file(empty, dir / "empty.json");
        std::ostringstream eo, ee;
        REQUIRE(cmd_stats(dir / "empty.json", eo, ee) == kExitOk);
        CHECK(eo.str().find("q_histogram: 0 0 0 0 0 0 0 0 0 0") != std::string::npos);
    }
    SUBCASE("corrupt snapshot exits 2 with a parse location") {
        std::ofstream(dir / "corrupt.json") << "{\"schema_version\": 1, nope";
        std::ostringstream eo, ee;
        CHECK(cmd_stats(dir / "corrupt.json", eo, ee) == kExitUsage);
        CHECK(ee.str().find("parse error") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_export emits dot text for both layers") {
    auto dir = temp_dir("export");
    std::ostringstream out, err;
    REQUIRE(cmd_build(kFixtures / "cases_small.json", kFixtures / "mock_config.json",
                      dir / "snapshot.json", out, err) == kExitOk);

    SUBCASE("experience layer") {
        std::ostringstream eo, ee;
        REQUIRE(cmd_export(dir / "snapshot.json", "dot", "exp", std::nullopt, eo, ee) == kExitOk);
        std::string dot = eo.str();
        CHECK(dot.find("digraph experience_layer") != std::string::npos);
        CHECK(dot.find("\"exp_0001\" -> \"exp_0002\"") != std::string::npos);
        CHECK(dot.find("penwidth") != std::string::npos);
    }
    SUBCASE("entity layer of one experience") {
        std::ostringstream eo, ee;
        REQUIRE(cmd_export(dir / "snapshot.json", "dot", "entity", std::string("exp_0001"), eo,
                           ee) == kExitOk);
        std::string dot = eo.str();
        CHECK(dot.find("digraph entity_layer") != std::string::npos);
        CHECK(dot.find("\"sepsis\" -> \"serum lactate\"") != std::string::npos);
    }
    SUBCASE("unknown format exits 2") {
        std::ostringstream eo, ee;
        CHECK(cmd_export(dir / "snapshot.json", "svg", "exp", std::nullopt, eo, ee) ==
              kExitUsage);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("cmd_simulate writes a deterministic calibration CSV") {
    auto dir = temp_dir("simulate");
    std::ofstream(dir / "tiny.json") << R"({"n_episodes": 25, "rng_seed": 7})";

    std::ostringstream o1, e1, o2, e2;
    REQUIRE(cmd_simulate(dir / "tiny.json", kFixtures / "mock_config.json", dir / "run1.csv",
                         o1, e1) == kExitOk);
    REQUIRE(cmd_simulate(dir / "tiny.json", kFixtures / "mock_config.json", dir / "run2.csv",
                         o2, e2) == kExitOk);
    std::string csv = slurp(dir / "run1.csv");
    CHECK(csv == slurp(dir / "run2.csv"));
    CHECK(csv.rfind("episode,mean_q_good,mean_q_bad,spearman\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);  // header + 25 rows

    SUBCASE("zero episodes leave quality at the prior") {
        std::ofstream(dir / "zero.json") << R"({"n_episodes": 0})";
        std::ostringstream o, e;
        REQUIRE(cmd_simulate(dir / "zero.json", kFixtures / "mock_config.json",
                             dir / "zero.csv", o, e) == kExitOk);
        std::string zero_csv = slurp(dir / "zero.csv");
        CHECK(zero_csv.find("0,0.500000000,0.500000000,") != std::string::npos);
    }
    SUBCASE("invalid scenario exits 2") {
        std::ofstream(dir / "bad.json") << R"({"p_correct_base": 1.5})";
        std::ostringstream o, e;
        CHECK(cmd_simulate(dir / "bad.json", kFixtures / "mock_config.json", dir / "bad.csv", o,
                           e) == kExitUsage);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("spearman agrees with the independent oracle") {
    SUBCASE("known values") {
        CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
              doctest::Approx(1.0));
        CHECK(spearman_rank_correlation({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
        CHECK(spearman_rank_correlation({1, 1, 1}, {1, 2, 3}) == 0.0);  // degenerate
    }
    SUBCASE("random vectors with ties") {
        Rng rng(13);
        for (int trial = 0; trial < 50; ++trial) {
            std::size_t n = 2 + rng.below(20);
            std::vector<double> x(n), y(n);
            for (auto& v : x) v = static_cast<double>(rng.below(6));  // force ties
            for (auto& v : y) v = rng.uniform();
            CHECK(spearman_rank_correlation(x, y) ==
                  doctest::Approx(test::oracle_spearman(x, y)).epsilon(1e-9));
        }
    }
}

TEST_SUITE_END();
