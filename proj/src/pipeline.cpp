#include "montage/production/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "montage/core/text.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace montage {

namespace {

std::string critique_section(const std::optional<std::string>& critique) {
    if (!critique || critique->empty()) return "";
    return "DIRECTOR CRITIQUE TO ADDRESS\n" + *critique + "\n\n";
}

const GateDecision* best_revise(const std::vector<GateDecision>& decisions,
                                std::size_t* index_out) {
    const GateDecision* best = nullptr;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i].kind != GateKind::revise) continue;
        if (!best || decisions[i].score > best->score) {
            best = &decisions[i];
            if (index_out) *index_out = i;
        }
    }
    return best;
}

} // namespace

DecompositionReply parse_decomposition_reply(const std::string& text) {
    DecompositionReply reply;
    static const std::regex post_re(R"(^\s*POST\s+([0-9]+)\s*:\s*(.*\S)\s*$)",
                                    std::regex::icase);
    static const std::regex order_re(R"(^\s*ORDER\s+[0-9]+\s*:\s*([0-9,\s]+)$)",
                                     std::regex::icase);

    std::vector<std::pair<int, std::string>> numbered;
    std::vector<std::vector<int>> raw_orders;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::smatch m;
        if (std::regex_match(line, m, post_re)) {
            numbered.emplace_back(std::stoi(m[1].str()), m[2].str());
        } else if (std::regex_match(line, m, order_re)) {
            // accept "1, 2, 3" and "1 2 3" alike
            std::string list = m[1].str();
            std::replace(list.begin(), list.end(), ',', ' ');
            std::vector<int> order;
            std::istringstream parts(list);
            int value;
            while (parts >> value) order.push_back(value);
            if (!order.empty()) raw_orders.push_back(std::move(order));
        }
    }

    std::stable_sort(numbered.begin(), numbered.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::map<int, std::size_t> position;
    for (const auto& [num, post_text] : numbered) {
        if (position.count(num)) {
            log::warn("duplicate POST number " + std::to_string(num) + " ignored");
            continue;
        }
        position[num] = reply.posts.size();
        reply.posts.push_back(post_text);
    }

    for (const auto& raw : raw_orders) {
        std::vector<std::size_t> order;
        std::set<std::size_t> used;
        bool ok = true;
        for (int num : raw) {
            std::size_t idx;
            if (!reply.posts.empty()) {
                auto it = position.find(num);
                if (it == position.end()) { ok = false; break; }
                idx = it->second;
            } else {
                // orders over the caller's current posts are 1-based
                if (num < 1) { ok = false; break; }
                idx = static_cast<std::size_t>(num - 1);
            }
            if (!used.insert(idx).second) { ok = false; break; }
            order.push_back(idx);
        }
        if (ok && !order.empty()) {
            reply.orders.push_back(std::move(order));
        } else {
            log::warn("dropping malformed ORDER line");
        }
    }
    return reply;
}

std::vector<std::string> provenance_for(const std::string& post_text,
                                        const std::vector<EvidenceFragment>& pool) {
    if (pool.empty()) raise(Errc::invalid_input, "provenance needs a non-empty pool");
    auto post_tokens = token_set(post_text);
    double best = -1.0;
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        scores[i] = token_jaccard(post_tokens, token_set(pool[i].text));
        best = std::max(best, scores[i]);
    }
    std::vector<std::string> ids;
    if (best > 0.0) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (scores[i] >= best - 1e-12) ids.push_back(pool[i].id);
        }
    } else {
        ids.push_back(pool.front().id);
    }
    return ids;
}

Producer::Producer(std::shared_ptr<Gateway> gateway, const PromptLibrary* prompts,
                   ProductionConfig config)
    : gateway_(std::move(gateway)),
      prompts_(prompts),
      config_(std::move(config)),
      director_(gateway_, prompts_, config_) {
    validate(config_);
    director_.coerce_accept(config_.ablation == Ablation::no_debate);
}

ChatRequest Producer::request_for(RoleTag role, std::string user_prompt) const {
    ChatRequest request;
    request.role_tag = role;
    request.system_prompt = system_prompt_for(role);
    request.user_prompt = std::move(user_prompt);
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.model_id = config_.model_id;
    return request;
}

NarrativeDraft Producer::writer_generate(const std::vector<EvidenceFragment>& pool,
                                         const TargetFabrication& target,
                                         const std::optional<std::string>& critique, int round,
                                         const CallContext& context) {
    if (pool.empty()) raise(Errc::invalid_input, "writer needs a non-empty evidence pool");
    auto prompt = prompts_->render(
        "writer", {{"event", target.source_event},
                   {"target_claim", target.claim_text},
                   {"pool_excerpt", render_pool_excerpt(pool, config_.pool_excerpt_size)},
                   {"critique_section", critique_section(critique)}});
    auto response = gateway_->complete(request_for(RoleTag::writer, prompt), context);
    NarrativeDraft draft;
    draft.text = response.text;
    draft.round = round;
    return draft;
}

std::pair<NarrativeDraft, DebateTrace> Producer::run_writer_loop(
    const std::vector<EvidenceFragment>& pool, const TargetFabrication& target,
    const CallContext& context) {
    DebateTrace trace;
    std::optional<std::string> critique;
    NarrativeDraft best_draft;
    double best_score = -1.0;
    int best_round = 0;

    for (int round = 1; round <= config_.k_writer; ++round) {
        auto draft = writer_generate(pool, target, critique, round, context);
        auto decision = director_.evaluate_narrative(draft, target, pool, context);
        draft.director_score = decision.score;
        draft.lt_verified = decision.kind != GateKind::reject;
        trace.rounds.push_back({round, draft.text, decision, {}});

        if (decision.kind == GateKind::accept) {
            trace.outcome = LoopOutcome::accepted;
            trace.first_approval_round = round;
            trace.best_round = round;
            return {std::move(draft), std::move(trace)};
        }
        if (decision.kind == GateKind::revise) {
            if (decision.score > best_score) {
                best_score = decision.score;
                best_round = round;
                best_draft = draft;
            }
            critique = decision.critique;
        } else {
            critique = "the draft failed fact verification; restate only statements present "
                       "in the evidence excerpts";
        }
    }

    if (best_round == 0) {
        raise(Errc::production_failed,
              "writer loop: no draft passed fact verification in " +
                  std::to_string(config_.k_writer) + " rounds");
    }
    trace.outcome = LoopOutcome::best_of_exhausted;
    trace.best_round = best_round;
    return {std::move(best_draft), std::move(trace)};
}

MontageSequence Producer::sequence_from_posts(const std::vector<std::string>& posts,
                                              const std::vector<EvidenceFragment>& pool,
                                              int round) {
    if (posts.empty()) raise(Errc::malformed_decomposition, "no posts to sequence");
    MontageSequence sequence;
    sequence.round = round;
    for (std::size_t i = 0; i < posts.size(); ++i) {
        SequencedPost post;
        post.text = posts[i];
        post.timestamp =
            config_.schedule_start + static_cast<std::int64_t>(i) * config_.schedule_spacing_s;
        post.provenance = provenance_for(posts[i], pool);
        sequence.fragments.push_back(std::move(post));
    }
    validate(sequence);
    return sequence;
}

std::vector<MontageSequence> Producer::editor_arrange(const NarrativeDraft& narrative,
                                                      const TargetFabrication& target,
                                                      const CallContext& context) {
    if (!pool_) raise(Errc::invalid_input, "editor needs the evidence pool in scope");
    auto prompt = prompts_->render(
        "editor", {{"event", target.source_event},
                   {"narrative", narrative.text},
                   {"target_claim", target.claim_text},
                   {"target_length", std::to_string(config_.target_length)},
                   {"beam_width", std::to_string(config_.beam_width)},
                   {"current_sequence", ""},
                   {"critique_section", ""}});
    auto response = gateway_->complete(request_for(RoleTag::editor, prompt), context);
    auto reply = parse_decomposition_reply(response.text);
    if (reply.posts.empty()) {
        raise(Errc::malformed_decomposition,
              "editor returned no POST lines for the initial decomposition");
    }
    if (reply.posts.size() > static_cast<std::size_t>(config_.target_length)) {
        log::warn("editor produced " + std::to_string(reply.posts.size()) +
                  " posts, above the requested bound of " +
                  std::to_string(config_.target_length));
    }

    std::vector<MontageSequence> candidates;
    if (reply.orders.empty()) {
        candidates.push_back(sequence_from_posts(reply.posts, *pool_, 1));
        return candidates;
    }
    for (const auto& order : reply.orders) {
        if (candidates.size() == static_cast<std::size_t>(config_.beam_width)) break;
        std::vector<std::string> arranged;
        bool ok = true;
        for (auto idx : order) {
            if (idx >= reply.posts.size()) { ok = false; break; }
            arranged.push_back(reply.posts[idx]);
        }
        if (!ok || arranged.empty()) continue;
        candidates.push_back(sequence_from_posts(arranged, *pool_, 1));
    }
    if (candidates.empty()) {
        candidates.push_back(sequence_from_posts(reply.posts, *pool_, 1));
    }
    return candidates;
}

std::vector<MontageSequence> Producer::editor_refine(const NarrativeDraft& narrative,
                                                     const MontageSequence& current,
                                                     const std::string& critique,
                                                     const TargetFabrication& target, int round,
                                                     const CallContext& context) {
    std::string current_section;
    if (!current.fragments.empty()) {
        current_section = "CURRENT POSTS\n" + render_sequence_posts(current) + "\n";
    }
    auto prompt = prompts_->render(
        "editor", {{"event", target.source_event},
                   {"narrative", narrative.text},
                   {"target_claim", target.claim_text},
                   {"target_length", std::to_string(config_.target_length)},
                   {"beam_width", std::to_string(config_.beam_width)},
                   {"current_sequence", current_section},
                   {"critique_section", critique_section(critique)}});
    auto response = gateway_->complete(request_for(RoleTag::editor, prompt), context);
    auto reply = parse_decomposition_reply(response.text);

    std::vector<std::string> base_posts;
    if (!reply.posts.empty()) {
        base_posts = reply.posts;
    } else {
        for (const auto& fragment : current.fragments) base_posts.push_back(fragment.text);
    }
    if (base_posts.empty()) {
        raise(Errc::malformed_decomposition, "editor refinement produced no posts");
    }

    std::vector<MontageSequence> candidates;
    if (reply.orders.empty()) {
        candidates.push_back(sequence_from_posts(base_posts, *pool_, round));
        return candidates;
    }
    for (const auto& order : reply.orders) {
        if (candidates.size() == static_cast<std::size_t>(config_.beam_width)) break;
        std::vector<std::string> arranged;
        bool ok = true;
        for (auto idx : order) {
            if (idx >= base_posts.size()) { ok = false; break; }
            arranged.push_back(base_posts[idx]);
        }
        if (!ok || arranged.empty()) continue;
        candidates.push_back(sequence_from_posts(arranged, *pool_, round));
    }
    if (candidates.empty()) {
        candidates.push_back(sequence_from_posts(base_posts, *pool_, round));
    }
    return candidates;
}

std::pair<MontageSequence, DebateTrace> Producer::run_editor_loop(
    const NarrativeDraft& narrative, const TargetFabrication& target,
    const std::vector<EvidenceFragment>& pool, const CallContext& context) {
    pool_ = &pool;
    const bool coerced = config_.ablation == Ablation::no_debate;

    DebateTrace trace;
    auto candidates = editor_arrange(narrative, target, context);

    MontageSequence global_best;
    double global_best_score = -1.0;
    int global_best_round = 0;

    for (int round = 1; round <= config_.k_editor; ++round) {
        std::size_t eval_count = coerced ? 1 : candidates.size();
        std::vector<GateDecision> decisions;
        std::vector<double> beam_scores;
        for (std::size_t i = 0; i < eval_count; ++i) {
            auto decision = director_.evaluate_sequence(candidates[i], target, pool, context);
            beam_scores.push_back(decision.score);
            decisions.push_back(std::move(decision));
        }

        // accepted candidate with the highest score wins the loop
        std::size_t accept_index = decisions.size();
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            if (decisions[i].kind != GateKind::accept) continue;
            if (accept_index == decisions.size() ||
                decisions[i].score > decisions[accept_index].score) {
                accept_index = i;
            }
        }

        std::size_t revise_index = decisions.size();
        const GateDecision* revise = best_revise(decisions, &revise_index);

        // the round's representative entry: the winning or best candidate
        std::size_t shown = accept_index < decisions.size()
                                ? accept_index
                                : (revise ? revise_index : std::size_t{0});
        trace.rounds.push_back({round, render_sequence_posts(candidates[shown]),
                                decisions[shown], beam_scores});

        if (accept_index < decisions.size()) {
            trace.outcome = LoopOutcome::accepted;
            trace.first_approval_round = round;
            trace.best_round = round;
            auto winner = candidates[accept_index];
            winner.round = round;
            winner.director_score = decisions[accept_index].score;
            return {std::move(winner), std::move(trace)};
        }

        if (revise && revise->score > global_best_score) {
            global_best_score = revise->score;
            global_best_round = round;
            global_best = candidates[revise_index];
            global_best.director_score = revise->score;
        }

        if (round == config_.k_editor) break;

        // refine from this round's best surviving candidate, or re-decompose
        // when everything was rejected
        if (revise) {
            candidates = editor_refine(narrative, candidates[revise_index], revise->critique,
                                       target, round + 1, context);
        } else {
            MontageSequence none;
            candidates = editor_refine(
                narrative, none,
                "every candidate failed fact verification; rebuild the posts strictly from "
                "the evidence excerpts",
                target, round + 1, context);
        }
    }

    if (global_best_round == 0) {
        raise(Errc::production_failed,
              "editor loop: no sequence passed fact verification in " +
                  std::to_string(config_.k_editor) + " rounds");
    }
    trace.outcome = LoopOutcome::best_of_exhausted;
    trace.best_round = global_best_round;
    return {std::move(global_best), std::move(trace)};
}

ProductionResult Producer::produce_single_agent(const std::vector<EvidenceFragment>& pool,
                                                const TargetFabrication& target,
                                                const CallContext& context) {
    auto prompt = prompts_->render(
        "single_agent",
        {{"event", target.source_event},
         {"target_claim", target.claim_text},
         {"target_length", std::to_string(config_.target_length)},
         {"pool_excerpt", render_pool_excerpt(pool, config_.pool_excerpt_size)}});
    auto response = gateway_->complete(request_for(RoleTag::writer, prompt), context);
    auto reply = parse_decomposition_reply(response.text);
    if (reply.posts.empty()) {
        raise(Errc::malformed_decomposition, "single-agent reply carried no POST lines");
    }

    ProductionResult result;
    result.sequence = sequence_from_posts(reply.posts, pool, 1);
    std::ostringstream joined;
    for (std::size_t i = 0; i < reply.posts.size(); ++i) {
        if (i) joined << "\n";
        joined << reply.posts[i];
    }
    result.narrative.text = joined.str();
    result.narrative.round = 1;
    return result;
}

ProductionResult Producer::produce_no_editor(const std::vector<EvidenceFragment>& pool,
                                             const TargetFabrication& target,
                                             const CallContext& context) {
    ProductionResult result;
    auto [draft, trace] = run_writer_loop(pool, target, context);
    auto posts = slice_into_parts(draft.text, static_cast<std::size_t>(config_.target_length));
    result.sequence = sequence_from_posts(posts, pool, 1);
    result.sequence.director_score = draft.director_score;
    result.narrative = std::move(draft);
    result.writer_trace = std::move(trace);
    return result;
}

ProductionResult Producer::produce_attack(const std::vector<EvidenceFragment>& pool,
                                          const TargetFabrication& target,
                                          const CallContext& context) {
    if (pool.empty()) raise(Errc::invalid_input, "produce_attack needs a non-empty pool");
    validate(target);
    pool_ = &pool;

    switch (config_.ablation) {
        case Ablation::single_agent:
            return produce_single_agent(pool, target, context);
        case Ablation::no_editor:
            return produce_no_editor(pool, target, context);
        case Ablation::full:
        case Ablation::no_debate:
            break;
    }

    ProductionResult result;
    auto [draft, writer_trace] = run_writer_loop(pool, target, context);
    auto [sequence, editor_trace] = run_editor_loop(draft, target, pool, context);
    result.narrative = std::move(draft);
    result.sequence = std::move(sequence);
    result.writer_trace = std::move(writer_trace);
    result.editor_trace = std::move(editor_trace);
    return result;
}

} // namespace montage
