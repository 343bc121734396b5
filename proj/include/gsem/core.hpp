#pragma once
// Atomic memory unit and its building blocks: the experience tuple
// (condition, content, polarity, quality), typed decision entities,
// the role-edge grammar, reasoning trajectories and case records.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsem {

struct ExperienceId {
    std::string value;

    auto operator<=>(const ExperienceId&) const = default;
};

enum class Polarity { Indication, Contraindication };

std::string to_string(Polarity p);
std::optional<Polarity> polarity_from_string(std::string_view s);

struct Experience {
    ExperienceId id;
    std::string condition;      // applicability context
    std::string content;        // decision strategy
    Polarity polarity = Polarity::Indication;
    double quality = 0.5;       // reliability score in [0,1]
    std::string task_type;      // normalized lowercase tag
    std::string evidence;
    std::int64_t created_at = 0;  // episode counter, not wall time

    bool operator==(const Experience&) const = default;
};

// Empty result means the experience is well-formed; each entry names the
// offending field and the violated rule.
std::vector<std::string> validate_experience(const Experience& e);

enum class EntityRole { Condition, Constraint, Action, Rationale, Outcome };

inline constexpr EntityRole kAllEntityRoles[] = {
    EntityRole::Condition, EntityRole::Constraint, EntityRole::Action,
    EntityRole::Rationale, EntityRole::Outcome};

std::string to_string(EntityRole r);
std::optional<EntityRole> entity_role_from_string(std::string_view s);

struct Entity {
    std::string surface;  // normalized lowercase, 1-3 words
    EntityRole role = EntityRole::Condition;

    auto operator<=>(const Entity&) const = default;
};

// Lowercase, collapse internal whitespace, strip surrounding punctuation.
// Rejects surfaces that do not land on 1-3 words; the reason (out-param)
// carries the raw string and rule.
std::optional<Entity> normalize_entity(std::string_view raw, EntityRole role,
                                       std::string* why_rejected = nullptr);

// True iff from -> to is one of the 15 allowed role transitions.
bool role_pair_allowed(EntityRole from, EntityRole to);

struct RoleEdge {
    Entity from;
    Entity to;

    auto operator<=>(const RoleEdge&) const = default;
};

bool validate_role_edge(const Entity& from, const Entity& to);

enum class Outcome { Success, Failure };

struct Trajectory {
    std::string case_id;
    std::vector<std::string> steps;
    Outcome outcome = Outcome::Failure;
    std::string final_answer;

    bool operator==(const Trajectory&) const = default;
};

struct CaseRecord {
    std::string case_id;
    std::string prompt;
    std::string gold_answer;
    std::string task_type;

    bool operator==(const CaseRecord&) const = default;
};

// Shared text-normalization helpers.
std::string normalize_text(std::string_view s);        // lowercase + collapse ws + trim
std::string normalize_task_type(std::string_view s);   // same rules as normalize_text
std::vector<std::string> split_words(std::string_view s);

}  // namespace gsem
