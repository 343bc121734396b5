#pragma once
// Message templates for every provider exchange. Templates carry {name}
// placeholders filled by render(); unknown braces are left untouched so
// the JSON examples inside the system prompts survive verbatim.

#include <map>
#include <string>
#include <string_view>

namespace gsem::prompts {

// Experience extraction
extern const std::string kIndicationSystem;
extern const std::string kIndicationHuman;        // {case_info} {trajectory}
extern const std::string kDivergenceSystem;
extern const std::string kDivergenceHuman;        // {success_trajectory} {failure_trajectory} {gold_answer} {wrong_answer}
extern const std::string kContraindicationSystem;
extern const std::string kContraindicationHuman;  // {case_info} {reference_analysis} {divergence} {failure_trajectory} {success_trajectory}

// Graph structure
extern const std::string kEntitySystem;
extern const std::string kEntityHuman;            // {condition} {content}
extern const std::string kRoleEdgeSystem;
extern const std::string kRoleEdgeHuman;          // {core_entities_json} {condition} {content}

// Edge weighting
extern const std::string kSimilaritySystem;
extern const std::string kSimilarityHuman;        // {condition_a} {content_a} {condition_b} {content_b}

// Task loop plumbing
extern const std::string kTrajectorySystem;
extern const std::string kTrajectoryHuman;        // {case_prompt}
extern const std::string kAnswerSystem;
extern const std::string kAnswerHuman;            // {injection} {case_prompt}
extern const std::string kJudgeSystem;
extern const std::string kJudgeHuman;             // {gold_answer} {candidate_answer}
extern const std::string kPolicySystem;
extern const std::string kPolicyHuman;            // {query} {position} {collected} {forward} {backtrack}

// Replaces each "{key}" for the keys present in slots; everything else is
// returned unchanged.
std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& slots);

}  // namespace gsem::prompts
