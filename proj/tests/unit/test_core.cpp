#include <doctest.h>

#include "gsem/core.hpp"
#include "gsem/simulate.hpp"

using namespace gsem;

TEST_SUITE_BEGIN("core");

namespace {

Experience well_formed() {
    Experience e;
    e.id = ExperienceId{"exp_0001"};
    e.condition = "suspected sepsis; rising lactate";
    e.content = "start empiric antibiotics within the first hour";
    e.polarity = Polarity::Indication;
    e.quality = 0.5;
    e.task_type = "treatment";
    e.evidence = "traj 1 step 2";
    return e;
}

}  // namespace

TEST_CASE("validate_experience accepts a well-formed experience") {
    CHECK(validate_experience(well_formed()).empty());
}

TEST_CASE("validate_experience flags quality out of range") {
    Experience e = well_formed();
    e.quality = 1.2;
    auto violations = validate_experience(e);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "quality: out of [0,1]");

    e.quality = -0.1;
    CHECK(validate_experience(e).size() == 1);
}

TEST_CASE("validate_experience flags empty fields") {
    Experience e = well_formed();
    e.condition = "";
    auto violations = validate_experience(e);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "condition: empty");

    e = well_formed();
    e.content = "";
    e.task_type = "";
    CHECK(validate_experience(e).size() == 2);
}

TEST_CASE("normalize_entity lowercases and collapses whitespace") {
    auto entity = normalize_entity("  Pancreatic   Head Injury ", EntityRole::Condition);
    REQUIRE(entity.has_value());
    CHECK(entity->surface == "pancreatic head injury");
    CHECK(entity->role == EntityRole::Condition);

    auto acronym = normalize_entity("IVC", EntityRole::Condition);
    REQUIRE(acronym.has_value());
    CHECK(acronym->surface == "ivc");
}

TEST_CASE("normalize_entity strips surrounding punctuation") {
    auto entity = normalize_entity("(serum lactate).", EntityRole::Action);
    REQUIRE(entity.has_value());
    CHECK(entity->surface == "serum lactate");
}

TEST_CASE("normalize_entity rejects word counts outside 1-3") {
    std::string why;
    auto rejected = normalize_entity("emergency damage control laparotomy with packing",
                                     EntityRole::Action, &why);
    CHECK_FALSE(rejected.has_value());
    CHECK(why.find("6 words") != std::string::npos);

    auto empty = normalize_entity("  ...  ", EntityRole::Condition, &why);
    CHECK_FALSE(empty.has_value());
    CHECK(why.find("empty") != std::string::npos);
}

TEST_CASE("normalize_entity is idempotent on random inputs") {
    Rng rng(7);
    const std::string charset = "aAbB zZ.,-()! 09";
    for (int trial = 0; trial < 200; ++trial) {
        std::string raw;
        std::size_t len = rng.below(24);
        for (std::size_t i = 0; i < len; ++i) raw.push_back(charset[rng.below(charset.size())]);
        auto first = normalize_entity(raw, EntityRole::Condition);
        if (!first) continue;
        auto second = normalize_entity(first->surface, EntityRole::Condition);
        REQUIRE(second.has_value());
        CHECK(second->surface == first->surface);
    }
}

TEST_CASE("role edge grammar is exactly the allowed 15 of 25 pairs") {
    using R = EntityRole;
    auto allowed = [](R from, R to) {
        switch (from) {
            case R::Condition: return true;  // all five targets allowed
            case R::Constraint: return to == R::Action || to == R::Rationale || to == R::Outcome;
            case R::Action:
                return to == R::Outcome || to == R::Rationale || to == R::Constraint ||
                       to == R::Action;
            case R::Rationale:
                return to == R::Action || to == R::Outcome || to == R::Constraint;
            case R::Outcome: return false;
        }
        return false;
    };
    int allowed_count = 0;
    for (R from : kAllEntityRoles) {
        for (R to : kAllEntityRoles) {
            CHECK(role_pair_allowed(from, to) == allowed(from, to));
            if (role_pair_allowed(from, to)) ++allowed_count;
        }
    }
    CHECK(allowed_count == 15);
}

TEST_CASE("validate_role_edge spot checks") {
    Entity condition{"sepsis", EntityRole::Condition};
    Entity action{"antibiotics", EntityRole::Action};
    Entity outcome{"recovery", EntityRole::Outcome};
    Entity constraint{"renal failure", EntityRole::Constraint};
    CHECK(validate_role_edge(condition, action));
    CHECK_FALSE(validate_role_edge(outcome, condition));
    CHECK_FALSE(validate_role_edge(constraint, condition));
}

TEST_CASE("polarity and role round-trip through their names") {
    CHECK(polarity_from_string(to_string(Polarity::Indication)) == Polarity::Indication);
    CHECK(polarity_from_string("Contraindication") == Polarity::Contraindication);
    CHECK_FALSE(polarity_from_string("positive").has_value());
    for (EntityRole role : kAllEntityRoles)
        CHECK(entity_role_from_string(to_string(role)) == role);
    CHECK(entity_role_from_string("Cond.") == EntityRole::Condition);
}

TEST_SUITE_END();
