#pragma once

#include <memory>
#include <string>
#include <vector>

#include "montage/llm/gateway.hpp"
#include "montage/production/config.hpp"
#include "montage/production/prompts.hpp"

namespace montage {

// The gate: verifies local truth, then scores the candidate as a victim
// proxy and applies the three-state decision at threshold tau.
class Director {
public:
    Director(std::shared_ptr<Gateway> gateway, const PromptLibrary* prompts,
             ProductionConfig config);

    // Whole-draft check: any local-truth failure rejects with index 0.
    GateDecision evaluate_narrative(const NarrativeDraft& draft, const TargetFabrication& target,
                                    const std::vector<EvidenceFragment>& pool,
                                    const CallContext& context);

    // Per-fragment check: failures carry the offending fragment indices.
    GateDecision evaluate_sequence(const MontageSequence& sequence,
                                   const TargetFabrication& target,
                                   const std::vector<EvidenceFragment>& pool,
                                   const CallContext& context);

    // no_debate runs: one scoring call, no truth gate, threshold zero.
    void coerce_accept(bool on) { coerce_accept_ = on; }

private:
    GateDecision score_candidate(const std::string& rendered_candidate,
                                 const TargetFabrication& target,
                                 const std::vector<EvidenceFragment>& pool,
                                 const CallContext& context);

    LtOptions lt_options(const CallContext& context) const;

    std::shared_ptr<Gateway> gateway_;
    const PromptLibrary* prompts_;
    ProductionConfig config_;
    bool coerce_accept_ = false;
};

// Parsed "SCORE:/VERDICT:/CRITIQUE:" reply; absent score means parse failure.
struct DirectorReply {
    std::optional<double> score;
    std::string critique;
};

DirectorReply parse_director_reply(const std::string& text);

// Shared prompt fodder.
std::string render_pool_excerpt(const std::vector<EvidenceFragment>& pool, std::size_t limit);
std::string render_sequence_posts(const MontageSequence& sequence);

} // namespace montage
