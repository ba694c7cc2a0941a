#include "montage/production/director.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "montage/core/text.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace montage {

const char* ablation_name(Ablation ablation) {
    switch (ablation) {
        case Ablation::full: return "full";
        case Ablation::no_debate: return "no_debate";
        case Ablation::no_editor: return "no_editor";
        case Ablation::single_agent: return "single_agent";
    }
    return "unknown";
}

Ablation ablation_from_name(const std::string& name) {
    if (name == "full") return Ablation::full;
    if (name == "no_debate") return Ablation::no_debate;
    if (name == "no_editor") return Ablation::no_editor;
    if (name == "single_agent") return Ablation::single_agent;
    raise(Errc::parse_error, "unknown ablation: " + name);
}

const char* loop_outcome_name(LoopOutcome outcome) {
    return outcome == LoopOutcome::accepted ? "accepted" : "best_of_exhausted";
}

void validate(const ProductionConfig& config) {
    if (config.tau < 0.0 || config.tau > 10.0) {
        raise(Errc::invalid_config, "tau must lie in [0,10]");
    }
    if (config.k_writer < 1) raise(Errc::invalid_config, "k_writer must be >= 1");
    if (config.k_editor < 1) raise(Errc::invalid_config, "k_editor must be >= 1");
    if (config.beam_width < 1) raise(Errc::invalid_config, "beam_width must be >= 1");
    if (config.target_length < 1) raise(Errc::invalid_config, "target_length must be >= 1");
    if (config.schedule_spacing_s <= 0) {
        raise(Errc::invalid_config, "schedule_spacing_s must be positive");
    }
    if (config.pool_excerpt_size < 1) {
        raise(Errc::invalid_config, "pool_excerpt_size must be >= 1");
    }
}

Json to_json(const ProductionConfig& config) {
    return Json{
        {"tau", config.tau},
        {"k_writer", config.k_writer},
        {"k_editor", config.k_editor},
        {"beam_width", config.beam_width},
        {"target_length", config.target_length},
        {"ablation", ablation_name(config.ablation)},
        {"lt_policy", lt_policy_name(config.lt_policy)},
        {"max_entailment_checks", config.max_entailment_checks},
        {"schedule_start", config.schedule_start},
        {"schedule_spacing_s", config.schedule_spacing_s},
        {"pool_excerpt_size", config.pool_excerpt_size},
        {"model_id", config.model_id},
        {"temperature", config.temperature},
        {"max_tokens", config.max_tokens},
    };
}

ProductionConfig production_config_from_json(const Json& j) {
    ProductionConfig config;
    config.tau = j.value("tau", config.tau);
    config.k_writer = j.value("k_writer", config.k_writer);
    config.k_editor = j.value("k_editor", config.k_editor);
    config.beam_width = j.value("beam_width", config.beam_width);
    config.target_length = j.value("target_length", config.target_length);
    if (j.contains("ablation")) {
        config.ablation = ablation_from_name(j["ablation"].get<std::string>());
    }
    if (j.contains("lt_policy")) {
        config.lt_policy = lt_policy_from_name(j["lt_policy"].get<std::string>());
    }
    config.max_entailment_checks = j.value("max_entailment_checks", config.max_entailment_checks);
    config.schedule_start = j.value("schedule_start", config.schedule_start);
    config.schedule_spacing_s = j.value("schedule_spacing_s", config.schedule_spacing_s);
    config.pool_excerpt_size = j.value("pool_excerpt_size", config.pool_excerpt_size);
    config.model_id = j.value("model_id", config.model_id);
    config.temperature = j.value("temperature", config.temperature);
    config.max_tokens = j.value("max_tokens", config.max_tokens);
    validate(config);
    return config;
}

Json to_json(const DebateTrace& trace) {
    Json rounds = Json::array();
    for (const auto& r : trace.rounds) {
        Json entry{{"round", r.round},
                   {"candidate", r.candidate_text},
                   {"decision", to_json(r.decision)}};
        if (!r.beam_scores.empty()) entry["beam_scores"] = r.beam_scores;
        rounds.push_back(std::move(entry));
    }
    Json j{{"rounds", std::move(rounds)},
           {"outcome", loop_outcome_name(trace.outcome)},
           {"best_round", trace.best_round}};
    if (trace.first_approval_round) j["first_approval_round"] = *trace.first_approval_round;
    return j;
}

DirectorReply parse_director_reply(const std::string& text) {
    DirectorReply reply;
    static const std::regex score_re(R"(SCORE\s*:\s*([0-9]+(?:\.[0-9]+)?))",
                                     std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, score_re)) {
        reply.score = std::stod(m[1].str());
    }
    static const std::regex critique_re(R"(CRITIQUE\s*:\s*)", std::regex::icase);
    if (std::regex_search(text, m, critique_re)) {
        reply.critique = text.substr(m.position(0) + m.length(0));
        while (!reply.critique.empty() &&
               (reply.critique.back() == '\n' || reply.critique.back() == ' ')) {
            reply.critique.pop_back();
        }
    }
    return reply;
}

std::string render_pool_excerpt(const std::vector<EvidenceFragment>& pool, std::size_t limit) {
    std::ostringstream out;
    std::size_t n = std::min(limit, pool.size());
    for (std::size_t i = 0; i < n; ++i) {
        out << "- [" << pool[i].id << "] " << pool[i].text << "\n";
    }
    return out.str();
}

std::string render_sequence_posts(const MontageSequence& sequence) {
    std::ostringstream out;
    for (std::size_t i = 0; i < sequence.fragments.size(); ++i) {
        out << "POST " << (i + 1) << " [" << format_utc(sequence.fragments[i].timestamp)
            << "]: " << sequence.fragments[i].text << "\n";
    }
    return out.str();
}

Director::Director(std::shared_ptr<Gateway> gateway, const PromptLibrary* prompts,
                   ProductionConfig config)
    : gateway_(std::move(gateway)), prompts_(prompts), config_(std::move(config)) {}

LtOptions Director::lt_options(const CallContext& context) const {
    LtOptions options;
    options.policy = config_.lt_policy;
    options.max_entailment_checks = config_.max_entailment_checks;
    if (config_.lt_policy == LtPolicy::llm_entailment) {
        auto gateway = gateway_;
        auto prompts = prompts_;
        auto config = config_;
        options.entailment = [gateway, prompts, config, context](
                                 std::string_view claim, const EvidenceFragment& post) {
            ChatRequest request;
            request.role_tag = RoleTag::entailment;
            request.system_prompt = system_prompt_for(RoleTag::entailment);
            request.user_prompt = prompts->render(
                "entailment", {{"claim", std::string(claim)}, {"post", post.text}});
            request.temperature = 0.0;
            request.max_tokens = 8;
            request.model_id = config.model_id;
            auto response = gateway->complete(request, context);
            auto normalized = normalize_text(response.text);
            return normalized.rfind("yes", 0) == 0;
        };
    }
    return options;
}

GateDecision Director::score_candidate(const std::string& rendered_candidate,
                                       const TargetFabrication& target,
                                       const std::vector<EvidenceFragment>& pool,
                                       const CallContext& context) {
    auto prompt = prompts_->render(
        "director", {{"event", target.source_event},
                     {"candidate", rendered_candidate},
                     {"target_claim", target.claim_text},
                     {"pool_excerpt", render_pool_excerpt(pool, config_.pool_excerpt_size)}});
    ChatRequest request;
    request.role_tag = RoleTag::director;
    request.system_prompt = system_prompt_for(RoleTag::director);
    request.user_prompt = prompt;
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.model_id = config_.model_id;

    auto reply = parse_director_reply(gateway_->complete(request, context).text);
    if (!reply.score) {
        // one re-prompt, then the round degrades to REVISE with score 0
        ChatRequest retry = request;
        retry.user_prompt +=
            "\nYour previous reply did not follow the response format. Reply again with "
            "SCORE, VERDICT, and CRITIQUE lines exactly as specified.";
        reply = parse_director_reply(gateway_->complete(retry, context).text);
    }
    double tau = coerce_accept_ ? 0.0 : config_.tau;
    if (!reply.score) {
        log::warn("director reply unparseable twice; recording REVISE with score 0");
        if (tau <= 0.0) return GateDecision::accept(0.0, tau);
        return GateDecision::revise(0.0, "director reply unparseable; no guidance available");
    }
    double score = std::clamp(*reply.score, 0.0, 10.0);
    if (score >= tau) return GateDecision::accept(score, tau);
    std::string critique = reply.critique.empty()
                               ? "score " + std::to_string(score) +
                                     " fell short of the acceptance bar; strengthen the "
                                     "implied causal chain"
                               : reply.critique;
    return GateDecision::revise(score, critique);
}

GateDecision Director::evaluate_narrative(const NarrativeDraft& draft,
                                          const TargetFabrication& target,
                                          const std::vector<EvidenceFragment>& pool,
                                          const CallContext& context) {
    if (draft.text.empty()) raise(Errc::invalid_input, "empty narrative candidate");
    if (!coerce_accept_) {
        // Every sentence of the draft must be covered by the evidence pool;
        // failures are reported by sentence index.
        auto sentences = split_sentences(draft.text);
        if (sentences.empty()) sentences.push_back(draft.text);
        std::vector<std::size_t> failures;
        auto options = lt_options(context);
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (!check_local_truth(sentences[i], pool, options).passed) failures.push_back(i);
        }
        if (!failures.empty()) return GateDecision::reject(std::move(failures));
    }
    return score_candidate(draft.text, target, pool, context);
}

GateDecision Director::evaluate_sequence(const MontageSequence& sequence,
                                         const TargetFabrication& target,
                                         const std::vector<EvidenceFragment>& pool,
                                         const CallContext& context) {
    if (sequence.fragments.empty()) raise(Errc::invalid_input, "empty sequence candidate");
    if (!coerce_accept_) {
        std::vector<std::size_t> failures;
        auto options = lt_options(context);
        for (std::size_t i = 0; i < sequence.fragments.size(); ++i) {
            if (!check_local_truth(sequence.fragments[i].text, pool, options).passed) {
                failures.push_back(i);
            }
        }
        if (!failures.empty()) return GateDecision::reject(std::move(failures));
    }
    return score_candidate(render_sequence_posts(sequence), target, pool, context);
}

} // namespace montage
