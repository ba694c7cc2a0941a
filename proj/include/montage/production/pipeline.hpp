#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "montage/llm/gateway.hpp"
#include "montage/production/config.hpp"
#include "montage/production/director.hpp"
#include "montage/production/prompts.hpp"

namespace montage {

struct ProductionResult {
    NarrativeDraft narrative;
    MontageSequence sequence;
    std::optional<DebateTrace> writer_trace; // absent for single_agent
    std::optional<DebateTrace> editor_trace; // absent for no_editor / single_agent
};

// One production team bound to a gateway, prompt set, and config.
class Producer {
public:
    Producer(std::shared_ptr<Gateway> gateway, const PromptLibrary* prompts,
             ProductionConfig config);

    NarrativeDraft writer_generate(const std::vector<EvidenceFragment>& pool,
                                   const TargetFabrication& target,
                                   const std::optional<std::string>& critique, int round,
                                   const CallContext& context);

    std::vector<MontageSequence> editor_arrange(const NarrativeDraft& narrative,
                                                const TargetFabrication& target,
                                                const CallContext& context);

    std::pair<NarrativeDraft, DebateTrace> run_writer_loop(
        const std::vector<EvidenceFragment>& pool, const TargetFabrication& target,
        const CallContext& context);

    std::pair<MontageSequence, DebateTrace> run_editor_loop(
        const NarrativeDraft& narrative, const TargetFabrication& target,
        const std::vector<EvidenceFragment>& pool, const CallContext& context);

    ProductionResult produce_attack(const std::vector<EvidenceFragment>& pool,
                                    const TargetFabrication& target,
                                    const CallContext& context);

private:
    std::vector<MontageSequence> editor_refine(const NarrativeDraft& narrative,
                                               const MontageSequence& current,
                                               const std::string& critique,
                                               const TargetFabrication& target, int round,
                                               const CallContext& context);

    MontageSequence sequence_from_posts(const std::vector<std::string>& posts,
                                        const std::vector<EvidenceFragment>& pool, int round);

    ProductionResult produce_single_agent(const std::vector<EvidenceFragment>& pool,
                                          const TargetFabrication& target,
                                          const CallContext& context);

    ProductionResult produce_no_editor(const std::vector<EvidenceFragment>& pool,
                                       const TargetFabrication& target,
                                       const CallContext& context);

    ChatRequest request_for(RoleTag role, std::string user_prompt) const;

    std::shared_ptr<Gateway> gateway_;
    const PromptLibrary* prompts_;
    ProductionConfig config_;
    Director director_;
    // Remembers the pool used by the current attack so the editor can stamp
    // provenance. Set at produce/loop entry.
    const std::vector<EvidenceFragment>* pool_ = nullptr;
};

// "POST n:" / "ORDER n:" reply parsing, shared with the single-agent path.
struct DecompositionReply {
    std::vector<std::string> posts;            // empty = keep current posts
    std::vector<std::vector<std::size_t>> orders; // 0-based index lists
};

DecompositionReply parse_decomposition_reply(const std::string& text);

// Pool ids with maximal token overlap against the post text. Never empty for
// a non-empty pool.
std::vector<std::string> provenance_for(const std::string& post_text,
                                        const std::vector<EvidenceFragment>& pool);

} // namespace montage
