#include <doctest.h>

#include "gsem/graph.hpp"
#include "gsem/error.hpp"
#include "gsem/simulate.hpp"
#include "support/generators.hpp"

using namespace gsem;

TEST_SUITE_BEGIN("graph");

namespace {

ExperienceNode simple_node(const std::string& id, std::vector<std::string> surfaces = {},
                           double quality = 0.5) {
    ExperienceNode node;
    node.experience.id = ExperienceId{id};
    node.experience.condition = "condition " + id;
    node.experience.content = "content " + id;
    node.experience.quality = quality;
    node.experience.task_type = "diagnosis";
    for (auto& s : surfaces) node.core_entities.push_back(Entity{s, EntityRole::Condition});
    return node;
}

ExperienceEdge edge_between(const std::string& src, const std::string& dst, double w,
                            double phi = 0.0) {
    EdgeScoreBreakdown breakdown{w, w, w, w, w};
    return ExperienceEdge{ExperienceId{src}, ExperienceId{dst}, w, phi, breakdown};
}

}  // namespace

TEST_CASE("add_node maintains counts and entity stats") {
    MemoryGraph g;
    g.add_node(simple_node("exp_0001", {"sepsis", "lactate"}));
    CHECK(g.doc_count() == 1);
    g.add_node(simple_node("exp_0002", {"sepsis", "antibiotics"}));
    CHECK(g.doc_count() == 2);
    CHECK(g.entity_df().at("sepsis") == 2);
    CHECK(g.entity_df().at("lactate") == 1);
    CHECK(g.entity_index().at("sepsis").linked_experiences.size() == 2);
    CHECK(g.check_integrity().empty());
}

TEST_CASE("add_node rejects duplicates and broken nodes") {
    MemoryGraph g;
    g.add_node(simple_node("exp_0001"));
    CHECK_THROWS_AS(g.add_node(simple_node("exp_0001")), ValidationError);

    ExperienceNode invalid = simple_node("exp_0002");
    invalid.experience.quality = 2.0;
    CHECK_THROWS_AS(g.add_node(invalid), ValidationError);

    ExperienceNode dangling = simple_node("exp_0003", {"sepsis"});
    dangling.role_edges.push_back(
        RoleEdge{Entity{"sepsis", EntityRole::Condition}, Entity{"ct scan", EntityRole::Action}});
    CHECK_THROWS_AS(g.add_node(dangling), ValidationError);

    ExperienceNode bad_embedding = simple_node("exp_0004");
    bad_embedding.embedding = std::vector<double>{0.5, 0.5};
    CHECK_THROWS_AS(g.add_node(bad_embedding), ValidationError);
}

TEST_CASE("add_edge validates endpoints and uniqueness") {
    MemoryGraph g;
    g.add_node(simple_node("exp_0001"));
    g.add_node(simple_node("exp_0002"));
    g.add_edge(edge_between("exp_0001", "exp_0002", 0.5));
    CHECK(effective_weight(*g.find_edge(ExperienceId{"exp_0001"}, ExperienceId{"exp_0002"})) ==
          doctest::Approx(0.5));

    CHECK_THROWS_AS(g.add_edge(edge_between("exp_0001", "exp_0009", 0.5)), ValidationError);
    CHECK_THROWS_AS(g.add_edge(edge_between("exp_0001", "exp_0002", 0.4)), ValidationError);
}

TEST_CASE("effective weight is the clipped prior plus accumulator") {
    ExperienceEdge e = edge_between("a", "b", 0.4);
    CHECK(effective_weight(e) == 0.4);
    e.phi = -0.05;
    CHECK(effective_weight(e) == doctest::Approx(0.35).epsilon(1e-12));
    e.w_prior = 0.9;
    e.phi = 0.3;
    CHECK(effective_weight(e) == 1.0);
    e.phi = -1.5;
    CHECK(effective_weight(e) == 0.0);
}

TEST_CASE("neighbors are ordered by weight then id") {
    MemoryGraph g;
    g.add_node(simple_node("exp_0001"));
    g.add_node(simple_node("exp_0002"));
    g.add_node(simple_node("exp_0003"));
    SUBCASE("isolated node") { CHECK(g.neighbors(ExperienceId{"exp_0001"}).empty()); }
    SUBCASE("descending weight") {
        g.add_edge(edge_between("exp_0001", "exp_0002", 0.3));
        g.add_edge(edge_between("exp_0001", "exp_0003", 0.7));
        auto out = g.neighbors(ExperienceId{"exp_0001"});
        REQUIRE(out.size() == 2);
        CHECK(out[0].first.value == "exp_0003");
        CHECK(out[1].first.value == "exp_0002");
    }
    SUBCASE("lexicographic tie-break") {
        g.add_edge(edge_between("exp_0003", "exp_0002", 0.5));
        g.add_edge(edge_between("exp_0003", "exp_0001", 0.5));
        auto out = g.neighbors(ExperienceId{"exp_0003"});
        REQUIRE(out.size() == 2);
        CHECK(out[0].first.value == "exp_0001");
        CHECK(out[1].first.value == "exp_0002");
    }
    SUBCASE("unknown id") {
        CHECK_THROWS_AS(g.neighbors(ExperienceId{"nope"}), ValidationError);
    }
}

TEST_CASE("empty graph snapshot round-trips") {
    MemoryGraph g;
    MemoryGraph back = load_snapshot(save_snapshot(g));
    CHECK(back == g);
}

TEST_CASE("snapshot round-trips a small graph with nonzero phi") {
    MemoryGraph g;
    ExperienceNode n1 = simple_node("exp_0001", {"sepsis", "lactate"}, 0.622459307);
    n1.role_edges.push_back(RoleEdge{n1.core_entities[0], n1.core_entities[1]});
    n1.embedding = std::vector<double>{0.6, 0.8};
    g.add_node(n1);
    g.add_node(simple_node("exp_0002", {"sepsis"}, 0.5));
    g.add_node(simple_node("exp_0003", {}, 0.377541));
    g.add_edge(edge_between("exp_0001", "exp_0002", 0.5, -0.05));
    g.add_edge(edge_between("exp_0002", "exp_0001", 0.5, 0.025));
    g.set_episode_counter(7);

    MemoryGraph back = load_snapshot(save_snapshot(g));
    // field-for-field equality, including phi and the episode counter
    CHECK(back == g);
    CHECK(back.check_integrity().empty());
}

TEST_CASE("snapshot version gate and parse errors") {
    MemoryGraph g;
    GraphSnapshot snapshot = save_snapshot(g);

    std::string wrong_version = snapshot.payload;
    auto pos = wrong_version.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    wrong_version.replace(pos, std::string("\"schema_version\": 1").size(),
                          "\"schema_version\": 99");
    CHECK_THROWS_WITH_AS(load_snapshot(GraphSnapshot{99, wrong_version}),
                         doctest::Contains("unsupported snapshot schema_version: 99"),
                         SnapshotError);

    CHECK_THROWS_AS(load_snapshot(GraphSnapshot{1, "{\"schema_version\": 1,"}), ParseError);
}

TEST_CASE("snapshot round-trip is the identity on random graphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        MemoryGraph g = test::random_graph(rng);
        g.set_episode_counter(static_cast<std::int64_t>(rng.below(1000)));
        MemoryGraph back = load_snapshot(save_snapshot(g));
        REQUIRE(back == g);
    }
}

TEST_CASE("referential integrity and weight bounds on random graphs") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        MemoryGraph g = test::random_graph(rng);
        CHECK(g.check_integrity().empty());
        for (const auto& [key, edge] : g.edges()) {
            CHECK(g.has_node(key.first));
            CHECK(g.has_node(key.second));
            double w = effective_weight(edge);
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
    }
}

TEST_SUITE_END();
