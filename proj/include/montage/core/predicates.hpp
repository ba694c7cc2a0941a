#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "montage/core/types.hpp"

namespace montage {

// How a fragment is checked against the evidence pool.
//   verbatim       exact normalized-string membership
//   substring      fragment is a contiguous span of some pool post
//   llm_entailment backend asked "fully supported by this post? YES/NO"
enum class LtPolicy { verbatim, substring, llm_entailment };

const char* lt_policy_name(LtPolicy policy);
LtPolicy lt_policy_from_name(const std::string& name);

// Verdict of a local-truth check with the pool posts that support it.
struct LtOutcome {
    bool passed = false;
    std::vector<std::string> supporting_ids;
};

// Callback used by the llm_entailment policy; wired to the gateway by the
// production layer so this module stays pure. Returns true iff the claim is
// fully supported by the post.
using EntailmentFn = std::function<bool(std::string_view claim, const EvidenceFragment& post)>;

struct LtOptions {
    LtPolicy policy = LtPolicy::verbatim;
    // Upper bound on entailment queries per check; candidates are pool posts
    // ranked by token overlap with the fragment.
    std::size_t max_entailment_checks = 3;
    EntailmentFn entailment;
};

// True iff the fragment is consistent with the pool under the policy.
// On success at least one supporting pool id is reported.
LtOutcome check_local_truth(std::string_view fragment_text,
                            const std::vector<EvidenceFragment>& pool,
                            const LtOptions& options);

// True iff strictly more verdicts adopt the fabrication than the truth.
// A tie is not a lie.
bool check_global_lie(const std::vector<VictimVerdict>& verdicts);

} // namespace montage
