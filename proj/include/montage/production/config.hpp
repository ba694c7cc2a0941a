#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "montage/core/predicates.hpp"
#include "montage/core/types.hpp"

namespace montage {

enum class Ablation { full, no_debate, no_editor, single_agent };

const char* ablation_name(Ablation ablation);
Ablation ablation_from_name(const std::string& name);

struct ProductionConfig {
    double tau = 7.0;      // Director acceptance threshold, 0-10 scale
    int k_writer = 5;      // max Writer-Director rounds
    int k_editor = 5;      // max Editor-Director rounds
    int beam_width = 3;    // orderings kept per Editor round
    int target_length = 12;
    Ablation ablation = Ablation::full;

    LtPolicy lt_policy = LtPolicy::verbatim;
    std::size_t max_entailment_checks = 3;

    std::int64_t schedule_start = 1600000000; // first synthetic post time
    std::int64_t schedule_spacing_s = 300;

    std::size_t pool_excerpt_size = 12; // pool posts shown in prompts
    std::string model_id;
    double temperature = 0.7;
    int max_tokens = 1024;
};

void validate(const ProductionConfig& config);
Json to_json(const ProductionConfig& config);
ProductionConfig production_config_from_json(const Json& j);

enum class LoopOutcome { accepted, best_of_exhausted };

const char* loop_outcome_name(LoopOutcome outcome);

struct DebateRound {
    int round = 1;
    std::string candidate_text; // narrative text or rendered post list
    GateDecision decision;      // editor rounds store the round's best decision
    std::vector<double> beam_scores; // per-candidate scores, editor rounds only
};

struct DebateTrace {
    std::vector<DebateRound> rounds;
    LoopOutcome outcome = LoopOutcome::accepted;
    std::optional<int> first_approval_round;
    int best_round = 0; // round holding the best gate-passing candidate
};

Json to_json(const DebateTrace& trace);

} // namespace montage
