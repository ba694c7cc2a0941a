#include "montage/judge/downstream.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace montage {

const char* decision_strategy_name(DecisionStrategy strategy) {
    return strategy == DecisionStrategy::majority_vote ? "majority_vote" : "ai_judge";
}

DecisionStrategy decision_strategy_from_name(const std::string& name) {
    if (name == "majority_vote") return DecisionStrategy::majority_vote;
    if (name == "ai_judge") return DecisionStrategy::ai_judge;
    raise(Errc::invalid_config, "unknown decision strategy '" + name + "'");
}

nlohmann::json to_json(const DownstreamDecision& decision) {
    nlohmann::json j{{"strategy", decision_strategy_name(decision.strategy)},
                     {"accepted", decision.accepted}};
    if (decision.strategy == DecisionStrategy::majority_vote) {
        j["vote_tally"] = {{"true", decision.vote_tally.true_count},
                           {"false", decision.vote_tally.false_count},
                           {"uncertain", decision.vote_tally.uncertain_count}};
    } else {
        j["judge_rationale"] = decision.judge_rationale;
    }
    return j;
}

DownstreamDecision decision_from_json(const nlohmann::json& j) {
    DownstreamDecision decision;
    decision.strategy = decision_strategy_from_name(j.at("strategy").get<std::string>());
    decision.accepted = j.at("accepted").get<bool>();
    if (decision.strategy == DecisionStrategy::majority_vote) {
        const auto& tally = j.at("vote_tally");
        decision.vote_tally.true_count = tally.at("true").get<int>();
        decision.vote_tally.false_count = tally.at("false").get<int>();
        decision.vote_tally.uncertain_count = tally.at("uncertain").get<int>();
    } else {
        decision.judge_rationale = j.value("judge_rationale", "");
    }
    return decision;
}

nlohmann::json to_json(const JudgeConfig& config) {
    return {{"model_id", config.model_id}, {"max_tokens", config.max_tokens}};
}

JudgeConfig judge_config_from_json(const nlohmann::json& j) {
    JudgeConfig config;
    config.model_id = j.value("model_id", config.model_id);
    config.max_tokens = j.value("max_tokens", config.max_tokens);
    return config;
}

DownstreamDecision majority_vote(const std::vector<VictimVerdict>& verdicts) {
    if (verdicts.empty()) raise(Errc::invalid_input, "majority vote over zero verdicts");
    DownstreamDecision decision;
    decision.strategy = DecisionStrategy::majority_vote;
    for (const auto& verdict : verdicts) {
        switch (verdict.verdict) {
        case Verdict::adopt_fabrication: decision.vote_tally.true_count++; break;
        case Verdict::adopt_truth: decision.vote_tally.false_count++; break;
        case Verdict::uncertain: decision.vote_tally.uncertain_count++; break;
        }
    }
    decision.accepted = 2 * decision.vote_tally.true_count > static_cast<int>(verdicts.size());
    return decision;
}

namespace {

std::string render_reports(const std::vector<VictimVerdict>& verdicts) {
    std::string out;
    for (const auto& verdict : verdicts) {
        char head[96];
        std::snprintf(head, sizeof(head), "ANALYST %d  VERDICT: %s  CONFIDENCE: %.2f\n",
                      verdict.victim_index, verdict_name(verdict.verdict), verdict.confidence);
        out += head;
        out += "RATIONALE: " + verdict.rationale + "\n\n";
    }
    return out;
}

std::optional<bool> parse_judge_reply(const std::string& text) {
    static const std::regex verdict_re(R"(VERDICT\s*:\s*(TRUE|FALSE))", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, verdict_re)) return std::nullopt;
    std::string word = m[1].str();
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return word == "TRUE";
}

std::string judge_rationale_of(const std::string& text) {
    static const std::regex rationale_re(R"(RATIONALE\s*:\s*)", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, rationale_re)) return text;
    std::string out = text.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    return out;
}

} // namespace

DownstreamDecision ai_judge(Gateway& gateway, const PromptLibrary& prompts,
                            const std::vector<PublishedPost>& feed,
                            const std::vector<VictimVerdict>& verdicts,
                            const TargetFabrication& target, const JudgeConfig& config,
                            const CallContext& context) {
    if (verdicts.empty()) raise(Errc::invalid_input, "judge needs at least one victim report");
    if (feed.empty()) raise(Errc::invalid_input, "judge feed is empty");

    ChatRequest request;
    request.role_tag = RoleTag::judge;
    request.system_prompt = system_prompt_for(RoleTag::judge);
    request.user_prompt = prompts.render("judge", {{"post_count", std::to_string(feed.size())},
                                                   {"timeline", render_timeline(feed)},
                                                   {"reports", render_reports(verdicts)},
                                                   {"claim", target.claim_text}});
    request.temperature = 0.0;
    request.max_tokens = config.max_tokens;
    request.model_id = config.model_id;

    auto text = gateway.complete(request, context).text;
    auto ruling = parse_judge_reply(text);
    if (!ruling) {
        auto retry = request;
        retry.user_prompt += "\n\nYour previous reply did not follow the response format. "
                             "Answer again using exactly the VERDICT / RATIONALE lines.";
        text = gateway.complete(retry, context).text;
        ruling = parse_judge_reply(text);
    }

    DownstreamDecision decision;
    decision.strategy = DecisionStrategy::ai_judge;
    if (!ruling) {
        log::warn("judge reply unparseable after re-prompt; rejecting");
        decision.accepted = false;
        decision.judge_rationale = "parse failure: judge response did not follow the format";
        return decision;
    }
    decision.accepted = *ruling;
    decision.judge_rationale = judge_rationale_of(text);
    return decision;
}

} // namespace montage
