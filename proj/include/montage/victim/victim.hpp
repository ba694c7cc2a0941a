#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/core/types.hpp"
#include "montage/inject/sybil.hpp"
#include "montage/llm/gateway.hpp"
#include "montage/production/prompts.hpp"

namespace montage {

enum class ReasoningStyle { direct, cot };
const char* reasoning_style_name(ReasoningStyle style);
ReasoningStyle reasoning_style_from_name(const std::string& name);

struct VictimConfig {
    int k_victims = 5;
    ReasoningStyle reasoning_style = ReasoningStyle::direct;
    double confidence_threshold_high = 0.8;
    std::string model_id;
    double temperature = 0.3;
    int max_tokens = 768;
};

void validate(const VictimConfig& config);
nlohmann::json to_json(const VictimConfig& config);
VictimConfig victim_config_from_json(const nlohmann::json& j);

// Renders the feed as the timeline block shown to victims and judges.
std::string render_timeline(const std::vector<PublishedPost>& feed);

// Parses a "VERDICT/CONFIDENCE/RATIONALE" reply; missing verdict leaves the
// optional empty so the caller can re-prompt.
struct VictimReply {
    std::optional<Verdict> verdict;
    double confidence = 0.0;
    std::string rationale;
};
VictimReply parse_victim_reply(const std::string& text);

// One isolated analyst answering whether the claim holds, given only the feed.
VictimVerdict query_victim(Gateway& gateway, const PromptLibrary& prompts,
                           const std::vector<PublishedPost>& feed,
                           const TargetFabrication& target, const VictimConfig& config,
                           int victim_index, const CallContext& context = {});

// K independent victims; one victim's terminal failure degrades that slot to
// UNCERTAIN/0.0 instead of aborting the batch.
std::vector<VictimVerdict> run_victims(Gateway& gateway, const PromptLibrary& prompts,
                                       const std::vector<PublishedPost>& feed,
                                       const TargetFabrication& target,
                                       const VictimConfig& config,
                                       const CallContext& context = {});

} // namespace montage
