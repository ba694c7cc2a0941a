#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "montage/core/types.hpp"
#include "montage/inject/sybil.hpp"
#include "montage/llm/gateway.hpp"
#include "montage/production/prompts.hpp"
#include "montage/victim/victim.hpp"

namespace montage {

enum class DecisionStrategy { majority_vote, ai_judge };
const char* decision_strategy_name(DecisionStrategy strategy);
DecisionStrategy decision_strategy_from_name(const std::string& name);

struct VoteTally {
    int true_count = 0;
    int false_count = 0;
    int uncertain_count = 0;
};

struct DownstreamDecision {
    DecisionStrategy strategy = DecisionStrategy::majority_vote;
    bool accepted = false;
    VoteTally vote_tally;        // majority_vote only
    std::string judge_rationale; // ai_judge only
};

nlohmann::json to_json(const DownstreamDecision& decision);
DownstreamDecision decision_from_json(const nlohmann::json& j);

// Crowd adoption: accepted iff strictly more than half the victims adopted
// the fabrication. UNCERTAIN counts in the tally but never toward acceptance.
DownstreamDecision majority_vote(const std::vector<VictimVerdict>& verdicts);

struct JudgeConfig {
    std::string model_id;
    int max_tokens = 768;
};

nlohmann::json to_json(const JudgeConfig& config);
JudgeConfig judge_config_from_json(const nlohmann::json& j);

// Hierarchical review: one model sees the raw feed plus all K victim reports
// and rules TRUE/FALSE on the claim. Unparseable output (after one re-prompt)
// rejects.
DownstreamDecision ai_judge(Gateway& gateway, const PromptLibrary& prompts,
                            const std::vector<PublishedPost>& feed,
                            const std::vector<VictimVerdict>& verdicts,
                            const TargetFabrication& target, const JudgeConfig& config,
                            const CallContext& context = {});

} // namespace montage
