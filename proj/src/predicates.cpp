#include "montage/core/predicates.hpp"

#include "montage/core/text.hpp"
#include "montage/util/errors.hpp"

#include <algorithm>

namespace montage {

const char* lt_policy_name(LtPolicy policy) {
    switch (policy) {
    case LtPolicy::verbatim: return "verbatim";
    case LtPolicy::substring: return "substring";
    case LtPolicy::llm_entailment: return "llm-entailment";
    }
    return "verbatim";
}

LtPolicy lt_policy_from_name(const std::string& name) {
    if (name == "verbatim") return LtPolicy::verbatim;
    if (name == "substring") return LtPolicy::substring;
    if (name == "llm-entailment" || name == "llm_entailment") return LtPolicy::llm_entailment;
    raise(Errc::invalid_config, "unknown LT policy '" + name + "'");
}

namespace {

// Terminal sentence punctuation is presentation, not content; a trailing
// period must not flip the truth gate.
std::string canon_for_match(std::string_view text) {
    std::string out = normalize_text(text);
    while (!out.empty()) {
        char c = out.back();
        if (c == '.' || c == '!' || c == '?' || c == ' ') out.pop_back();
        else break;
    }
    return out;
}

} // namespace

LtOutcome check_local_truth(std::string_view fragment_text,
                            const std::vector<EvidenceFragment>& pool,
                            const LtOptions& options) {
    if (normalize_text(fragment_text).empty())
        raise(Errc::invalid_input, "fragment text is empty");
    if (pool.empty()) raise(Errc::invalid_input, "evidence pool is empty");
    const std::string needle = canon_for_match(fragment_text);

    LtOutcome outcome;
    if (needle.empty()) return outcome; // pure punctuation supports nothing
    switch (options.policy) {
    case LtPolicy::verbatim: {
        for (const auto& post : pool) {
            if (canon_for_match(post.text) == needle) outcome.supporting_ids.push_back(post.id);
        }
        outcome.passed = !outcome.supporting_ids.empty();
        return outcome;
    }
    case LtPolicy::substring: {
        for (const auto& post : pool) {
            if (normalize_text(post.text).find(needle) != std::string::npos)
                outcome.supporting_ids.push_back(post.id);
        }
        outcome.passed = !outcome.supporting_ids.empty();
        return outcome;
    }
    case LtPolicy::llm_entailment: {
        if (!options.entailment)
            raise(Errc::invalid_config, "llm-entailment policy requires an entailment backend");
        // Rank pool posts by token overlap and query only the most promising
        // few; one YES settles the check.
        const auto fragment_tokens = token_set(fragment_text);
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i)
            ranked.emplace_back(token_jaccard(fragment_tokens, token_set(pool[i].text)), i);
        std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return pool[a.second].id < pool[b.second].id;
        });
        const std::size_t checks = std::min(options.max_entailment_checks, ranked.size());
        for (std::size_t k = 0; k < checks; ++k) {
            const auto& post = pool[ranked[k].second];
            if (options.entailment(fragment_text, post)) {
                outcome.passed = true;
                outcome.supporting_ids.push_back(post.id);
                return outcome;
            }
        }
        outcome.passed = false;
        return outcome;
    }
    }
    return outcome;
}

bool check_global_lie(const std::vector<VictimVerdict>& verdicts) {
    if (verdicts.empty()) raise(Errc::invalid_input, "verdict list is empty");
    std::size_t fabrication = 0;
    std::size_t truth = 0;
    for (const auto& v : verdicts) {
        if (v.verdict == Verdict::adopt_fabrication) ++fabrication;
        if (v.verdict == Verdict::adopt_truth) ++truth;
    }
    return fabrication > truth;
}

} // namespace montage
