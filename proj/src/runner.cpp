#include "montage/run/runner.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "montage/core/text.hpp"
#include "montage/dataset/bundle.hpp"
#include "montage/production/pipeline.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/jsonl.hpp"
#include "montage/util/logging.hpp"
#include "montage/util/rng.hpp"

namespace fs = std::filesystem;

namespace montage {

namespace {

struct TrialPlan {
    std::string event;
    TargetFabrication target;
    const EventBundle* bundle = nullptr;
    std::size_t index = 0;
    std::string trial_id;
    std::uint64_t seed = 0;
};

std::vector<TrialPlan> plan_trials(const ExperimentConfig& config,
                                   const std::vector<EventBundle>& bundles) {
    std::vector<const EventBundle*> selected;
    if (config.events.empty()) {
        for (const auto& bundle : bundles) selected.push_back(&bundle);
    } else {
        for (const auto& name : config.events) {
            const EventBundle* found = nullptr;
            for (const auto& bundle : bundles)
                if (bundle.event_name == name) found = &bundle;
            if (!found) raise(Errc::invalid_config, "no bundle for event '" + name + "'");
            selected.push_back(found);
        }
    }

    std::vector<TrialPlan> plans;
    for (const auto* bundle : selected) {
        if (bundle->targets.empty()) {
            log::warn("event " + bundle->event_name + " has no targets; skipping");
            continue;
        }
        std::size_t take = bundle->targets.size();
        if (config.targets_per_event > 0)
            take = std::min(take, config.targets_per_event);
        for (std::size_t i = 0; i < take; ++i) {
            TrialPlan plan;
            plan.event = bundle->event_name;
            plan.target = bundle->targets[i];
            plan.bundle = bundle;
            plan.index = plans.size();
            plan.trial_id = plan.event + "/" + plan.target.id;
            plan.seed = derive_seed(config.seed, "trial/" + plan.trial_id);
            plans.push_back(std::move(plan));
        }
    }
    if (plans.empty()) raise(Errc::invalid_config, "experiment plan is empty: no targets");
    return plans;
}

struct TrialOutcome {
    nlohmann::json record;
    std::optional<TrialResult> result;
    std::size_t index = 0;
};

TrialOutcome run_one_trial(const TrialPlan& plan, const ExperimentConfig& config,
                           const std::string& fingerprint, std::shared_ptr<Gateway> gateway,
                           const PromptLibrary& prompts) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialOutcome outcome;
    outcome.index = plan.index;
    auto& record = outcome.record;
    record = {{"type", "trial"},           {"trial_id", plan.trial_id},
              {"trial_index", plan.index}, {"seed", plan.seed},
              {"event", plan.event},       {"target_id", plan.target.id},
              {"config_fingerprint", fingerprint}};

    const auto wall_ms = [&t0] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    try {
        CallContext ctx{plan.trial_id};
        Producer producer(gateway, &prompts, config.production);
        auto production = producer.produce_attack(plan.bundle->evidence_pool, plan.target, ctx);

        auto bots = make_bot_pool(config.bots, derive_seed(plan.seed, "bots"));
        auto attack = assign_publishers(production.sequence, bots, config.assignment_strategy,
                                        derive_seed(plan.seed, "assign"));
        const std::size_t normal_n =
            config.normal_count.value_or(production.sequence.fragments.size());
        auto feed = build_feed(attack, plan.bundle->evidence_pool, normal_n,
                               derive_seed(plan.seed, "feed"),
                               provenance_union(production.sequence));

        auto verdicts = run_victims(*gateway, prompts, feed, plan.target, config.victim, ctx);

        TrialResult result;
        result.event = plan.event;
        result.target_id = plan.target.id;
        result.verdicts = verdicts;
        result.config_fingerprint = fingerprint;
        for (const auto& strategy : config.strategies) {
            if (decision_strategy_from_name(strategy) == DecisionStrategy::majority_vote)
                result.decisions[strategy] = majority_vote(verdicts);
            else
                result.decisions[strategy] =
                    ai_judge(*gateway, prompts, feed, verdicts, plan.target, config.judge, ctx);
        }

        record["status"] = "ok";
        nlohmann::json production_j{{"narrative", to_json(production.narrative)}};
        if (production.writer_trace)
            production_j["writer_trace"] = to_json(*production.writer_trace);
        if (production.editor_trace)
            production_j["editor_trace"] = to_json(*production.editor_trace);
        record["production"] = std::move(production_j);
        record["sequence"] = to_json(production.sequence);
        nlohmann::json bots_j = nlohmann::json::array();
        for (const auto& bot : bots) bots_j.push_back(to_json(bot));
        record["bots"] = std::move(bots_j);
        nlohmann::json feed_j = nlohmann::json::array();
        for (const auto& post : feed) feed_j.push_back(to_json(post));
        record["feed"] = std::move(feed_j);
        nlohmann::json verdicts_j = nlohmann::json::array();
        for (const auto& verdict : verdicts) verdicts_j.push_back(to_json(verdict));
        record["verdicts"] = std::move(verdicts_j);
        nlohmann::json decisions_j = nlohmann::json::object();
        for (const auto& [strategy, decision] : result.decisions)
            decisions_j[strategy] = to_json(decision);
        record["decisions"] = std::move(decisions_j);
        outcome.result = std::move(result);
    } catch (const Error& e) {
        record["status"] = "failed";
        record["error"] = e.what();
        log::warn("trial " + plan.trial_id + " failed and is excluded from metrics: " + e.what());
    }
    record["wall_ms"] = wall_ms();
    return outcome;
}

void write_metrics_files(const std::string& out_dir,
                         const std::map<std::string, MetricsReport>& reports,
                         double hc_threshold) {
    nlohmann::json mj{{"schema", "montage/metrics/1"}, {"hc_threshold", hc_threshold}};
    nlohmann::json reports_j = nlohmann::json::object();
    for (const auto& [name, report] : reports) reports_j[name] = to_json(report);
    mj["reports"] = std::move(reports_j);
    std::ofstream mjson(fs::path(out_dir) / "metrics.json", std::ios::binary);
    mjson << mj.dump(2) << "\n";

    std::ofstream mtxt(fs::path(out_dir) / "metrics.txt", std::ios::binary);
    if (reports.empty())
        mtxt << "no successful trials; metrics undefined\n";
    else
        mtxt << render_report_table(reports);
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    validate(config);
    if (out_dir.empty()) raise(Errc::invalid_config, "output directory is required");

    auto bundles = load_bundles_dir(config.bundles_dir);
    auto plans = plan_trials(config, bundles);

    fs::create_directories(fs::path(out_dir) / "transcripts");
    const std::string run_log = (fs::path(out_dir) / "run.jsonl").string();
    const std::string calls_log = (fs::path(out_dir) / "transcripts" / "calls.jsonl").string();
    { std::ofstream(run_log, std::ios::trunc); }
    { std::ofstream(calls_log, std::ios::trunc); }

    const std::string fingerprint = config_fingerprint(config);
    {
        std::ofstream cfg(fs::path(out_dir) / "config.json", std::ios::binary);
        cfg << to_json(config).dump(2) << "\n";
    }

    auto backend = make_backend(config.backend);
    auto gateway = std::make_shared<Gateway>(backend, config.backend.retry,
                                             config.backend.max_concurrency);
    std::mutex calls_mutex;
    gateway->set_transcript_sink([&](const TranscriptEntry& entry) {
        std::lock_guard<std::mutex> lock(calls_mutex);
        append_jsonl(calls_log, to_json(entry));
    });

    PromptLibrary prompts = config.templates_dir.empty()
                                ? PromptLibrary::builtin()
                                : PromptLibrary::from_dir(config.templates_dir);

    append_jsonl(run_log, {{"type", "run"},
                           {"schema", "montage/run/1"},
                           {"config", to_json(config)},
                           {"config_fingerprint", fingerprint},
                           {"trials_planned", plans.size()},
                           {"backend", backend->name()},
                           {"started_utc", format_utc(std::time(nullptr))}});

    // replayed scripts admit no concurrency: call order is the contract
    const int parallelism =
        config.backend.kind == "scripted" ? 1 : std::max(1, config.trial_parallelism);

    std::vector<TrialOutcome> outcomes(plans.size());
    std::mutex log_mutex;
    auto execute = [&](const TrialPlan& plan) {
        auto outcome = run_one_trial(plan, config, fingerprint, gateway, prompts);
        std::lock_guard<std::mutex> lock(log_mutex);
        append_jsonl(run_log, outcome.record);
        outcomes[outcome.index] = std::move(outcome);
    };

    if (parallelism == 1) {
        for (const auto& plan : plans) execute(plan);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const int n = std::min<int>(parallelism, static_cast<int>(plans.size()));
        workers.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= plans.size()) return;
                    execute(plans[i]);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    RunSummary summary;
    summary.run_dir = out_dir;
    summary.planned = plans.size();
    std::vector<TrialResult> results;
    for (auto& outcome : outcomes) {
        if (outcome.result) {
            results.push_back(std::move(*outcome.result));
            ++summary.succeeded;
        } else {
            ++summary.failed;
        }
    }

    if (!results.empty())
        summary.reports = compute_by_event(results, config.victim.confidence_threshold_high);
    else
        log::error("no trial succeeded; metrics are undefined for this run");
    write_metrics_files(out_dir, summary.reports, config.victim.confidence_threshold_high);
    return summary;
}

std::vector<TrialResult> load_trials_from_run(const std::string& run_dir) {
    const auto run_log = fs::path(run_dir) / "run.jsonl";
    if (!fs::exists(run_log))
        raise(Errc::missing_run, "no run.jsonl under " + run_dir);
    std::vector<std::pair<std::size_t, TrialResult>> indexed;
    for (const auto& record : read_jsonl(run_log.string())) {
        if (record.value("type", "") != "trial") continue;
        if (record.value("status", "") != "ok") continue;
        indexed.emplace_back(record.value("trial_index", std::size_t{0}),
                             trial_from_json(record));
    }
    std::sort(indexed.begin(), indexed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<TrialResult> trials;
    trials.reserve(indexed.size());
    for (auto& [index, trial] : indexed) trials.push_back(std::move(trial));
    return trials;
}

std::map<std::string, MetricsReport> recompute_metrics(const std::string& run_dir,
                                                       double hc_threshold) {
    auto trials = load_trials_from_run(run_dir);
    if (trials.empty())
        raise(Errc::undefined_metric, "run " + run_dir + " has no successful trials");
    return compute_by_event(trials, hc_threshold);
}

} // namespace montage
