#include "gsem/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gsem {

std::string to_string(Polarity p) {
    return p == Polarity::Indication ? "indication" : "contraindication";
}

std::optional<Polarity> polarity_from_string(std::string_view s) {
    std::string n = normalize_text(s);
    if (n == "indication") return Polarity::Indication;
    if (n == "contraindication") return Polarity::Contraindication;
    return std::nullopt;
}

std::vector<std::string> validate_experience(const Experience& e) {
    std::vector<std::string> violations;
    if (e.id.value.empty()) violations.push_back("id: empty");
    if (e.condition.empty()) violations.push_back("condition: empty");
    if (e.content.empty()) violations.push_back("content: empty");
    if (!(e.quality >= 0.0 && e.quality <= 1.0)) violations.push_back("quality: out of [0,1]");
    if (e.task_type.empty()) violations.push_back("task_type: empty");
    return violations;
}

std::string to_string(EntityRole r) {
    switch (r) {
        case EntityRole::Condition: return "condition";
        case EntityRole::Constraint: return "constraint";
        case EntityRole::Action: return "action";
        case EntityRole::Rationale: return "rationale";
        case EntityRole::Outcome: return "outcome";
    }
    return "condition";
}

std::optional<EntityRole> entity_role_from_string(std::string_view s) {
    std::string n = normalize_text(s);
    if (n == "condition" || n == "cond." || n == "cond") return EntityRole::Condition;
    if (n == "constraint" || n == "constr." || n == "constr") return EntityRole::Constraint;
    if (n == "action" || n == "act." || n == "act") return EntityRole::Action;
    if (n == "rationale" || n == "rat." || n == "rat") return EntityRole::Rationale;
    if (n == "outcome" || n == "out." || n == "out") return EntityRole::Outcome;
    return std::nullopt;
}

std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // swallow leading whitespace
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(c)));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string normalize_task_type(std::string_view s) { return normalize_text(s); }

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::optional<Entity> normalize_entity(std::string_view raw, EntityRole role,
                                       std::string* why_rejected) {
    std::string n = normalize_text(raw);
    // Surrounding punctuation only; interior characters stay untouched.
    // Stripping can expose whitespace whose removal exposes yet more edge
    // punctuation, so iterate to a fixpoint.
    while (true) {
        std::size_t begin = 0, end = n.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(n[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(n[end - 1]))) --end;
        std::string stripped = normalize_text(std::string_view(n).substr(begin, end - begin));
        if (stripped == n) break;
        n = std::move(stripped);
    }

    if (n.empty()) {
        if (why_rejected) *why_rejected = "entity \"" + std::string(raw) + "\": empty after normalization";
        return std::nullopt;
    }
    std::size_t words = split_words(n).size();
    if (words < 1 || words > 3) {
        if (why_rejected)
            *why_rejected = "entity \"" + std::string(raw) + "\": " + std::to_string(words) +
                            " words (allowed 1-3)";
        return std::nullopt;
    }
    return Entity{std::move(n), role};
}

namespace {

// Allowed role transitions; Outcome has no outgoing edges.
constexpr std::array<std::pair<EntityRole, EntityRole>, 15> kAllowedRoleEdges = {{
    {EntityRole::Condition, EntityRole::Action},
    {EntityRole::Condition, EntityRole::Condition},
    {EntityRole::Condition, EntityRole::Constraint},
    {EntityRole::Condition, EntityRole::Outcome},
    {EntityRole::Condition, EntityRole::Rationale},
    {EntityRole::Constraint, EntityRole::Action},
    {EntityRole::Constraint, EntityRole::Rationale},
    {EntityRole::Constraint, EntityRole::Outcome},
    {EntityRole::Action, EntityRole::Outcome},
    {EntityRole::Action, EntityRole::Rationale},
    {EntityRole::Action, EntityRole::Constraint},
    {EntityRole::Action, EntityRole::Action},
    {EntityRole::Rationale, EntityRole::Action},
    {EntityRole::Rationale, EntityRole::Outcome},
    {EntityRole::Rationale, EntityRole::Constraint},
}};

}  // namespace

bool role_pair_allowed(EntityRole from, EntityRole to) {
    return std::find(kAllowedRoleEdges.begin(), kAllowedRoleEdges.end(),
                     std::make_pair(from, to)) != kAllowedRoleEdges.end();
}

bool validate_role_edge(const Entity& from, const Entity& to) {
    return role_pair_allowed(from.role, to.role);
}

}  // namespace gsem
