#include <doctest.h>

#include <cmath>

#include "gsem/error.hpp"
#include "gsem/similarity.hpp"
#include "gsem/simulate.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace gsem;

TEST_SUITE_BEGIN("similarity");

namespace {

ExperienceNode node_with(const std::string& id, std::vector<Entity> entities,
                         std::vector<RoleEdge> edges = {}, const std::string& task = "diagnosis") {
    ExperienceNode node;
    node.experience.id = ExperienceId{id};
    node.experience.condition = "condition " + id;
    node.experience.content = "content " + id;
    node.experience.task_type = task;
    node.core_entities = std::move(entities);
    node.role_edges = std::move(edges);
    return node;
}

CorpusStats stats_of(const std::vector<const ExperienceNode*>& corpus) {
    CorpusStats stats;
    for (const auto* node : corpus) {
        stats.add_document(node->core_entities);
    }
    return stats;
}

const Entity kSepsisC{"sepsis", EntityRole::Condition};
const Entity kLactateA{"lactate", EntityRole::Action};
const Entity kAntibioticsA{"antibiotics", EntityRole::Action};

}  // namespace

TEST_CASE("entity similarity of a node with itself is 1") {
    ExperienceNode a = node_with("exp_a", {kSepsisC, kLactateA});
    CorpusStats stats = stats_of({&a});
    CHECK(entity_similarity(a, a, stats) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entity similarity of disjoint entity sets is 0") {
    ExperienceNode a = node_with("exp_a", {kSepsisC});
    ExperienceNode b = node_with("exp_b", {Entity{"migraine", EntityRole::Condition}});
    CorpusStats stats = stats_of({&a, &b});
    CHECK(entity_similarity(a, b, stats) == 0.0);
}

TEST_CASE("entity similarity matches the worked two-document corpus") {
    // N=2, shared "sepsis" everywhere, private entities once each:
    // idf(sepsis) = ln(3/3)+1 = 1, idf(private) = ln(1.5)+1, so the
    // cosine collapses to 1 / (1 + idf_private^2).
    ExperienceNode e1 = node_with("exp_1", {kSepsisC, kLactateA});
    ExperienceNode e2 = node_with("exp_2", {kSepsisC, kAntibioticsA});
    CorpusStats stats = stats_of({&e1, &e2});
    double idf_private = std::log(1.5) + 1.0;
    double expected = 1.0 / (1.0 + idf_private * idf_private);
    double got = entity_similarity(e1, e2, stats);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.33610).epsilon(1e-4));
    CHECK(got == doctest::Approx(test::oracle_entity_similarity(e1, e2, {&e1, &e2}))
                     .epsilon(1e-12));
}

TEST_CASE("entity similarity handles nodes without entities") {
    ExperienceNode a = node_with("exp_a", {});
    ExperienceNode b = node_with("exp_b", {kSepsisC});
    CorpusStats stats = stats_of({&a, &b});
    CHECK(entity_similarity(a, b, stats) == 0.0);
    CHECK(entity_similarity(a, a, stats) == 0.0);
}

TEST_CASE("entity similarity is symmetric and agrees with the oracle on random pairs") {
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        ExperienceNode a = test::random_node(rng, "exp_a");
        ExperienceNode b = test::random_node(rng, "exp_b");
        ExperienceNode c = test::random_node(rng, "exp_c");
        std::vector<const ExperienceNode*> corpus{&a, &b, &c};
        CorpusStats stats = stats_of(corpus);
        double ab = entity_similarity(a, b, stats);
        double ba = entity_similarity(b, a, stats);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0 + 1e-12);
        CHECK(ab ==
              doctest::Approx(test::oracle_entity_similarity(a, b, corpus)).epsilon(1e-9));
    }
}

TEST_CASE("adding a shared entity never decreases entity similarity") {
    Rng rng(32);
    for (int trial = 0; trial < 40; ++trial) {
        ExperienceNode a = test::random_node(rng, "exp_a", 4);
        ExperienceNode b = test::random_node(rng, "exp_b", 4);
        Entity shared{"sharedmarker", EntityRole::Condition};
        std::vector<const ExperienceNode*> corpus{&a, &b};
        CorpusStats stats = stats_of(corpus);
        double before = entity_similarity(a, b, stats);

        ExperienceNode a2 = a, b2 = b;
        a2.core_entities.push_back(shared);
        b2.core_entities.push_back(shared);
        // Same corpus statistics, richer nodes.
        CHECK(entity_similarity(a2, b2, stats) >= before - 1e-12);
    }
}

TEST_CASE("role paths enumerate label sequences of simple walks") {
    Entity c{"sepsis", EntityRole::Condition};
    Entity a{"antibiotics", EntityRole::Action};
    Entity o{"recovery", EntityRole::Outcome};
    ExperienceNode node = node_with("exp_a", {c, a, o}, {RoleEdge{c, a}, RoleEdge{a, o}});

    auto k1 = role_paths(node, 1);
    CHECK(k1.size() == 2);
    auto k2 = role_paths(node, 2);
    REQUIRE(k2.size() == 1);
    RolePath expected{{EntityRole::Condition, EntityRole::Action},
                      {EntityRole::Action, EntityRole::Outcome}};
    CHECK(*k2.begin() == expected);

    ExperienceNode short_node = node_with("exp_b", {c, a}, {RoleEdge{c, a}});
    CHECK(role_paths(short_node, 2).empty());

    ExperienceNode bare = node_with("exp_c", {c});
    for (int k = 1; k <= 4; ++k) CHECK(role_paths(bare, k).empty());
}

TEST_CASE("role paths match exhaustive enumeration on random nodes") {
    Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        ExperienceNode node = test::random_node(rng, "exp_r");
        for (int k = 1; k <= 4; ++k) {
            auto got = role_paths(node, k);
            auto expected = test::oracle_role_paths(node, k);
            REQUIRE(got == expected);
        }
    }
}

TEST_CASE("structure similarity worked examples") {
    Entity c{"sepsis", EntityRole::Condition};
    Entity a{"antibiotics", EntityRole::Action};
    Entity o{"recovery", EntityRole::Outcome};
    ExperienceNode chain = node_with("exp_a", {c, a, o}, {RoleEdge{c, a}, RoleEdge{a, o}});
    ExperienceNode stub = node_with("exp_b", {c, a}, {RoleEdge{c, a}});

    SUBCASE("identical path sets on k=1,2 give 0.3") {
        CHECK(structure_similarity(chain, chain) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("disjoint structures give 0") {
        Entity r{"physiology", EntityRole::Rationale};
        ExperienceNode other = node_with("exp_c", {r, o}, {RoleEdge{r, o}});
        CHECK(structure_similarity(stub, other) == 0.0);
    }
    SUBCASE("half-overlapping k=1 sets give 0.05") {
        // chain: P1 = {C->A, A->O}; stub: P1 = {C->A}: J1 = 1/2, J2 = 0.
        CHECK(structure_similarity(chain, stub) == doctest::Approx(0.05).epsilon(1e-12));
    }
}

TEST_CASE("structure similarity matches the oracle on random pairs") {
    Rng rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        ExperienceNode a = test::random_node(rng, "exp_a");
        ExperienceNode b = test::random_node(rng, "exp_b");
        double got = structure_similarity(a, b);
        CHECK(got == doctest::Approx(test::oracle_structure_similarity(a, b)).epsilon(1e-9));
        CHECK(got == doctest::Approx(structure_similarity(b, a)).epsilon(1e-12));
        CHECK(got >= 0.0);
        CHECK(got <= 1.0 + 1e-12);
    }
}

TEST_CASE("synergy similarity passes through, clamps, and falls back") {
    Experience a, b;
    a.id = ExperienceId{"exp_a"};
    a.condition = "sepsis";
    a.content = "antibiotics";
    b.id = ExperienceId{"exp_b"};
    b.condition = "trauma";
    b.content = "laparotomy";

    SUBCASE("scripted value passes through") {
        ScriptedChatProvider judge({{"semantic similarity", R"({"similarity": 0.7, "reason": "close"})", 0}});
        CHECK(synergy_similarity(a, b, judge) == doctest::Approx(0.7));
    }
    SUBCASE("values above 1 clamp to 1") {
        ScriptedChatProvider judge({{"semantic similarity", R"({"similarity": 1.3, "reason": "x"})", 0}});
        CHECK(synergy_similarity(a, b, judge) == 1.0);
    }
    SUBCASE("persistent garbage falls back to 0") {
        ScriptedChatProvider judge({{"semantic similarity", "not json at all", 0}});
        CHECK(synergy_similarity(a, b, judge) == 0.0);
    }
    SUBCASE("markdown fences are tolerated") {
        ScriptedChatProvider judge(
            {{"semantic similarity", "```json\n{\"similarity\": 0.4, \"reason\": \"r\"}\n```", 0}});
        CHECK(synergy_similarity(a, b, judge) == doctest::Approx(0.4));
    }
}

TEST_CASE("task similarity is a case-insensitive equality indicator") {
    Experience a, b;
    a.task_type = "diagnosis";
    b.task_type = "diagnosis";
    CHECK(task_similarity(a, b) == 1);
    b.task_type = "treatment";
    CHECK(task_similarity(a, b) == 0);
    b.task_type = "Diagnosis";
    CHECK(task_similarity(a, b) == 1);
}

TEST_CASE("initial edge weight combines components convexly") {
    SimilarityWeights uniform;
    CHECK(initial_edge_weight(1, 1, 1, 1, uniform).combined == doctest::Approx(1.0));
    CHECK(initial_edge_weight(1, 0, 0, 1, uniform).combined == doctest::Approx(0.5));
    CHECK(initial_edge_weight(0.33610, 0.05, 0.7, 1, uniform).combined ==
          doctest::Approx(0.521525).epsilon(1e-9));
    CHECK_THROWS_AS(initial_edge_weight(1.2, 0, 0, 0, uniform), ValidationError);
    CHECK_THROWS_AS(initial_edge_weight(0, -0.1, 0, 0, uniform), ValidationError);

    SimilarityWeights skewed{0.7, 0.1, 0.1, 0.1};
    CHECK(initial_edge_weight(1, 0, 0, 0, skewed).combined == doctest::Approx(0.7));
    SimilarityWeights broken{0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(initial_edge_weight(1, 0, 0, 0, broken), ValidationError);
}

TEST_CASE("build_edges connects pairs strictly above the threshold") {
    MemoryGraph g;
    Entity c1{"sepsis", EntityRole::Condition};
    Entity a1{"lactate", EntityRole::Action};
    Entity c2{"sepsis", EntityRole::Condition};
    Entity a2{"antibiotics", EntityRole::Action};
    g.add_node(node_with("exp_a", {c1, a1}, {RoleEdge{c1, a1}}));
    g.add_node(node_with("exp_b", {c2, a2}, {RoleEdge{c2, a2}}));
    // exp_c: disjoint entities, no structure, same task type.
    g.add_node(node_with("exp_c", {Entity{"migraine", EntityRole::Condition}}));

    // Pairs are scored in sorted order: (a,b), (a,c), (b,c).
    ScriptedChatProvider judge({
        {"semantic similarity", R"({"similarity": 0.7, "reason": "overlap"})", 1},
        {"semantic similarity", R"({"similarity": 0.39999999999999996, "reason": "boundary"})", 1},
        {"semantic similarity", R"({"similarity": 0.1, "reason": "far"})", 1},
    });
    SimilarityWeights uniform;
    BuildEdgesResult result = build_edges(g, uniform, 0.35, judge);
    CHECK(result.pairs_scored == 3);
    CHECK(result.edges_created == 2);

    // (a,b): s_entity > 0, structure 0.1, synergy 0.7, task 1 -> well above.
    const ExperienceEdge* ab = g.find_edge(ExperienceId{"exp_a"}, ExperienceId{"exp_b"});
    REQUIRE(ab != nullptr);
    CHECK(g.find_edge(ExperienceId{"exp_b"}, ExperienceId{"exp_a"}) != nullptr);
    CHECK(ab->w_prior == ab->breakdown.combined);
    CHECK(ab->breakdown.s_synergy == doctest::Approx(0.7));

    // (a,c): components (0, 0, 0.39999999999999996, 1) land exactly on
    // the threshold; strict inequality keeps the pair unconnected.
    CHECK(g.find_edge(ExperienceId{"exp_a"}, ExperienceId{"exp_c"}) == nullptr);
    CHECK(g.find_edge(ExperienceId{"exp_c"}, ExperienceId{"exp_a"}) == nullptr);
    CHECK(g.find_edge(ExperienceId{"exp_b"}, ExperienceId{"exp_c"}) == nullptr);
}

TEST_CASE("build_edges rejects graphs with fewer than two nodes") {
    MemoryGraph g;
    g.add_node(node_with("exp_a", {}));
    ScriptedChatProvider judge({});
    SimilarityWeights uniform;
    CHECK_THROWS_AS(build_edges(g, uniform, 0.35, judge), ValidationError);
}

TEST_CASE("build_edges aborts with partial progress on provider failure") {
    MemoryGraph g;
    g.add_node(node_with("exp_a", {}));
    g.add_node(node_with("exp_b", {}));
    g.add_node(node_with("exp_c", {}));
    // First pair scores, then the script runs dry.
    ScriptedChatProvider judge(
        {{"semantic similarity", R"({"similarity": 0.9, "reason": "r"})", 1}});
    SimilarityWeights uniform;
    CHECK_THROWS_WITH_AS(build_edges(g, uniform, 0.35, judge),
                         doctest::Contains("after 1 of 3 pairs"), ProviderError);
    CHECK(g.edges().empty());  // atomic: nothing inserted
}

TEST_SUITE_END();
