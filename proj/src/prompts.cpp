#include "gsem/prompts.hpp"

namespace gsem::prompts {

const std::string kIndicationSystem = R"(You are a medical knowledge engineer extracting positive knowledge experiences (Indications) from successful clinical reasoning trajectories.

DEFINITION:
An Indication is a contextualized clinical reasoning experience that captures how medical knowledge is applied in practice to achieve successful diagnostic or therapeutic outcomes.

ANALYSIS FRAMEWORK:
- CLINICAL CONTEXT: Identify patient characteristics, symptoms, and situational factors that define applicability.
- ACTIONABLE GUIDANCE: Specify the diagnostic or therapeutic approach taken, and highlight the decisive next step.
- REASONING LOGIC: Explain the causal relationships and rationale that connect context to action, focusing on the key cue or mechanism that makes the action appropriate.
- OUTCOME BENEFIT: Describe what this action improves in reasoning quality, such as avoiding misdiagnosis, reducing delay, or prioritizing a reversible cause.

EXTRACTION PRINCIPLES:
- Focus on reasoning patterns embedded in successful trajectories.
- Capture the connection between clinical presentation, decision-making, and outcomes.
- Extract transferable knowledge applicable to similar clinical scenarios.
- Prefer specific decision-relevant guidance over generic textbook advice.
- Make applicability conditions explicit as short phrases that can serve as retrieval cues.
- Ground the experience in the provided trajectory and cite where the pattern appears.
- Use standard clinical and biomedical terminology. Prefer guideline-style terms, established disease names, and test names. Avoid informal wording and ambiguous lay descriptions.

OUTPUT FORMAT:
Generate 1-2 knowledge experiences as a valid JSON array. The output must be ONLY the JSON array with no additional text, explanation, or markdown code blocks.

[
  {
    "content":   "A coherent 2-3 sentence clinical reasoning experience that states the context, action, rationale, benefit.",
    "condition": "Precise applicability conditions as short semicolon-separated phrases.",
    "task_type": "Clinical task category as a short phrase.",
    "evidence":  "Trajectory references using trajectory IDs and steps."
  }
]

CRITICAL: Output ONLY valid JSON array. No markdown, no explanation, no code blocks. Start with [ and end with ].

The experience should read as a clinical decision rule: "In [context], perform [action] because [rationale].")";

const std::string kIndicationHuman = R"(# Case Information
{case_info}

# Successful Reasoning Trajectories
{trajectory}

Extract 1-2 Indication experiences as JSON array.)";

const std::string kDivergenceSystem = R"(You are a clinical reasoning analyst identifying fatal divergence points between successful and failed diagnostic trajectories.

DEFINITION:
A fatal divergence point is the earliest critical decision difference where the failed trajectory commits to an irreversible reasoning path that prevents correct diagnosis or treatment.

DIVERGENCE ANALYSIS FRAMEWORK:
- DECISION COMPARISON: Compare reasoning decisions at each step between failure and success trajectories.
- CRITICALITY ASSESSMENT: Identify which decision difference directly caused the ultimate failure.
- IRREVERSIBILITY ANALYSIS: Determine the point where the failed trajectory cannot self-correct.
- CONSEQUENCE TRACING: Map how the divergent decision leads to the adverse outcome.

IDENTIFICATION PRINCIPLES:
- Focus on the EARLIEST decision point where paths meaningfully separate.
- Identify decisions that are IRREVERSIBLE given subsequent trajectory constraints.
- Analyze CAUSAL LINKS between the divergent decision and final failure.
- Consider MEDICAL URGENCY and time-sensitive intervention windows.

OUTPUT FORMAT:
Generate divergence analysis as JSON object:

{
  "divergence_step": <integer>,
  "success_decision": "Decision in successful trajectory at this step",
  "failure_decision": "Erroneous decision in failed trajectory",
  "why_fatal": "Why this difference is fatal and irreversible",
  "consequence": "Adverse outcome pathway this divergence initiates"
}

The analysis should capture: At step [N], success chose [A] while failure chose [B], which is fatal because [mechanism], leading to [consequence].)";

const std::string kDivergenceHuman = R"(# Successful Trajectory
{success_trajectory}

# Failed Trajectory
{failure_trajectory}

# Task Goal
The correct outcome is: {gold_answer}
The failed trajectory resulted in: {wrong_answer}

Identify the fatal divergence point as JSON object.)";

const std::string kContraindicationSystem = R"(You are a clinical safety analyst extracting contraindication experiences from failed reasoning trajectories.

DEFINITION:
A Contraindication is a reasoning error pattern learned from diagnostic or therapeutic failures, capturing what approaches should be avoided in specific clinical contexts to prevent adverse outcomes.

ANALYSIS FRAMEWORK:
- ERROR PATTERN: Identify the specific reasoning or decision-making error that occurred.
- CLINICAL CONTEXT: Specify the situation where this error led to failure.
- FAILURE MECHANISM: Analyze how this error caused diagnostic delay or therapeutic harm through a clear causal chain.
- CONSEQUENCE ANALYSIS: Document the failure outcome that resulted, such as a missed critical step, wrong decision, or delayed diagnosis.

EXTRACTION PRINCIPLES:
- Focus on systematic and preventable errors in the reasoning process rather than random mistakes.
- Prefer concrete decision errors over abstract cognitive-bias labels.
- Use the provided failure-success divergence analysis to anchor the contraindication in the concrete difference between failure and success.
- Frame the insight as a safety guideline with explicit risk scenarios and clear boundaries.
- Ground the contraindication in the provided trajectories and cite where the failure emerges.
- Use standard clinical and biomedical terminology. Prefer established disease names, test names, and treatment terms. Avoid informal wording and ambiguous lay descriptions.

OUTPUT FORMAT:
Generate 1 contraindication experience as JSON object:

{
  "content":   "A coherent 2-3 sentence safety experience that states the context, the prohibited error pattern, the failure mechanism, and the consequence.",
  "condition": "Specific risk scenario as short semicolon-separated phrases. Include population, presentation, high-risk cues, and timing or setting when relevant.",
  "task_type": "Clinical task category as a short phrase.",
  "evidence":  "Failure-success references using case or trajectory IDs, divergence point, and step numbers."
}

The experience should read as a safety warning: "In [context], do not [error] because [mechanism] leads to [harm].")";

const std::string kContraindicationHuman = R"(# Case Information
{case_info}

# Reference Analysis (for context)
{reference_analysis}

# Failure-Success Divergence Analysis
{divergence}

# Failure Trajectory (Original)
{failure_trajectory}

# Success Trajectory (Original)
{success_trajectory}

Extract 1 Contraindication experience as JSON object.)";

const std::string kEntitySystem = R"(You are extracting a compact set of medical decision-structure entities from a reusable clinical reasoning experience.

GOAL:
Extract only the most decision-driving medical entities that define the clinical situation and the actionable strategy, while keeping the entity list small and easy to normalize.

ROLE SCHEMA (fixed):
- Condition: Diagnoses, symptoms, findings, clinical states, patient status. Keep 1-2 anchors that determine whether the strategy applies.
- Constraint: Contraindications, feasibility limits, special risks. Keep at most 1 anchor; if none, omit.
- Action: Diagnostic tests, treatments, interventions, procedures. Keep 1-2 anchors that truly change the decision.
- Rationale: Medical reasoning basis, mechanism, justification. Keep at most 1 anchor; if none, omit.
- Outcome: Intended clinical goal or effect. Keep at most 1 anchor; if none, omit.

EXTRACTION RULES:
- Extract only medically meaningful, decision-driving anchor entities.
- Use standard medical terminology; avoid generic words.
- CRITICAL: Each entity MUST be a noun or noun phrase of EXACTLY 1-3 words.
- Do not duplicate the same meaning across roles.
- Keep the total set compact (typically 5-8 entities).

OUTPUT FORMAT:
{
  "core_entities": [
    {"entity": "...", "role": "Condition"},
    {"entity": "...", "role": "Action"}
  ]
})";

const std::string kEntityHuman = R"(## Condition
{condition}

## Content
{content}

Extract the core decision-structure entities and roles as specified.
Return a valid JSON object with field `core_entities'.
Output only the JSON, no other text.)";

const std::string kRoleEdgeSystem = R"(You are extracting the decision-flow structure (reasoning skeleton) of a clinical experience using role-to-role edges.

ALLOWED ROLE-EDGES:
- Condition->Action, Condition->Condition, Condition->Constraint, Condition->Outcome, Condition->Rationale
- Constraint->Action, Constraint->Rationale, Constraint->Outcome
- Action->Outcome, Action->Rationale, Action->Constraint, Action->Action
- Rationale->Action, Rationale->Outcome, Rationale->Constraint

EXTRACTION RULES:
- Only use edges from the allowed list above.
- Include an edge only if it reflects a clear reasoning transition in the text.
- Every role-edge MUST be grounded by at least one entity-edge. Do NOT output a role-edge without a concrete entity pair.
- Prefer a minimal but expressive skeleton (typically 2-6 edges).

OUTPUT FORMAT:
{
  "role_edges": ["Condition->Constraint", "Constraint->Action", ...],
  "entity_edges": [
    {
      "edge": "Condition->Constraint",
      "from_entity": "<entity from core_entities>",
      "to_entity":   "<entity from core_entities>"
    }
  ]
})";

const std::string kRoleEdgeHuman = R"(## Core Entities with Roles
{core_entities_json}

## Condition
{condition}

## Content
{content}

Extract the role-edge decision-flow structure and ground each
role-edge to specific entity pairs from the core entities.
Output only the JSON, no other text.)";

const std::string kSimilaritySystem = R"(You are evaluating the semantic similarity between two clinical reasoning experiences.

EVALUATION CRITERIA:
- Clinical context similarity: Do they address similar medical situations, conditions, or patient populations?
- Strategy similarity: Do they use similar diagnostic or treatment approaches?
- Reasoning logic: Do they follow similar decision-making patterns?
- Transferability: Would insights from one be applicable to the other?

SCORING SCALE:
- 0.0: Completely unrelated (different domains, conditions, or strategies)
- 0.3: Weakly related (share some general medical principles but different contexts)
- 0.5: Moderately related (share some clinical aspects or reasoning patterns)
- 0.7: Highly related (similar conditions, strategies, or decision patterns)
- 1.0: Nearly identical (same condition and strategy with minor variations)

OUTPUT FORMAT:
{
  "similarity": <float between 0.0 and 1.0>,
  "reason": "<brief explanation in 1-2 sentences>"
})";

const std::string kSimilarityHuman = R"(## Experience A
Condition: {condition_a}
Content: {content_a}

## Experience B
Condition: {condition_b}
Content: {content_b}

Evaluate the semantic similarity between these two experiences.
Return a valid JSON object with `similarity' (float) and `reason' (string).
Output only the JSON, no other text.)";

const std::string kTrajectorySystem = R"(You are a careful clinical decision-maker working through a case step by step.

Write your reasoning as numbered steps, one per line, like:
1. <first observation or inference>
2. <next decision>

End with a single line:
FINAL ANSWER: <your answer>)";

const std::string kTrajectoryHuman = R"(# Case
{case_prompt}

Work through the case and give your final answer.)";

const std::string kAnswerSystem =
    R"(You are a careful clinical decision-maker. Read the case and reply with only your final answer, as briefly as possible.)";

const std::string kAnswerHuman = R"({injection}# Case
{case_prompt}

Final answer:)";

const std::string kJudgeSystem =
    R"(You judge whether a candidate answer matches a reference answer in meaning. Reply with exactly one word: YES or NO.)";

const std::string kJudgeHuman = R"(Reference answer: {gold_answer}
Candidate answer: {candidate_answer}

Do they match? Reply YES or NO.)";

const std::string kPolicySystem = R"(You are steering retrieval over a memory graph of clinical experiences. At each step you see the current experience, forward candidates, and backtrack candidates, each as "id | condition".

Choose exactly one action and reply with one line, nothing else:
COLLECT            (keep the current experience for the task)
EXPLORE <id>       (move to that forward candidate)
BACKTRACK <id>     (jump to that backtrack candidate)
STOP               (end this path))";

const std::string kPolicyHuman = R"(Query: {query}

Current experience: {position}

Collected so far: {collected}

Forward candidates:
{forward}

Backtrack candidates:
{backtrack}

Reply with one action line.)";

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
    std::string out(tmpl);
    for (const auto& [key, value] : slots) {
        const std::string token = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace gsem::prompts
