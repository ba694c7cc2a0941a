#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "montage/dataset/bundle.hpp"
#include "montage/dataset/pheme.hpp"
#include "montage/production/pipeline.hpp"
#include "montage/production/prompts.hpp"
#include "montage/run/config.hpp"
#include "montage/run/plots.hpp"
#include "montage/run/runner.hpp"
#include "montage/run/sweep.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace fs = std::filesystem;
using namespace montage;

namespace {

int cmd_dataset_build(const std::string& root, const std::string& out,
                      const IngestOptions& options) {
    ParseStats stats;
    auto threads = parse_archive(root, &stats);
    auto bundles = build_bundles(threads, options);
    fs::create_directories(out);
    for (const auto& bundle : bundles) {
        auto path = (fs::path(out) / (bundle.event_name + ".json")).string();
        save_bundle(bundle, path);
        std::printf("%-24s evidence %5zu  targets %4zu  avg cascade %7.2f%s\n",
                    bundle.event_name.c_str(), bundle.stats.evidence_count,
                    bundle.stats.target_count, bundle.stats.avg_cascade,
                    bundle.low_evidence ? "  [low evidence]" : "");
    }
    std::printf("threads %zu (skipped %zu) -> %zu bundles in %s\n", stats.threads,
                stats.skipped, bundles.size(), out.c_str());
    return 0;
}

const EventBundle* find_bundle(const std::vector<EventBundle>& bundles,
                               const std::string& event) {
    for (const auto& bundle : bundles)
        if (bundle.event_name == event) return &bundle;
    raise(Errc::invalid_config, "no bundle for event '" + event + "'");
}

int cmd_attack_produce(const ExperimentConfig& config, const std::string& event,
                       const std::string& target_id, const std::string& out) {
    auto bundles = load_bundles_dir(config.bundles_dir);
    const EventBundle* bundle = find_bundle(bundles, event);
    if (bundle->targets.empty())
        raise(Errc::invalid_input, "event '" + event + "' has no fabrication targets");

    const TargetFabrication* target = &bundle->targets.front();
    if (!target_id.empty()) {
        target = nullptr;
        for (const auto& candidate : bundle->targets)
            if (candidate.id == target_id) target = &candidate;
        if (!target)
            raise(Errc::invalid_input,
                  "event '" + event + "' has no target '" + target_id + "'");
    }

    auto gateway = std::make_shared<Gateway>(make_backend(config.backend),
                                             config.backend.retry,
                                             config.backend.max_concurrency);
    PromptLibrary prompts = config.templates_dir.empty()
                                ? PromptLibrary::builtin()
                                : PromptLibrary::from_dir(config.templates_dir);
    Producer producer(gateway, &prompts, config.production);
    CallContext context{event + "/" + target->id};
    auto result = producer.produce_attack(bundle->evidence_pool, *target, context);

    nlohmann::json j{{"schema", "montage/attack/1"},
                     {"event", event},
                     {"target", to_json(*target)},
                     {"narrative", to_json(result.narrative)},
                     {"sequence", to_json(result.sequence)},
                     {"calls", gateway->call_count()}};
    if (result.writer_trace) j["writer_trace"] = to_json(*result.writer_trace);
    if (result.editor_trace) j["editor_trace"] = to_json(*result.editor_trace);

    std::ofstream file(out, std::ios::binary);
    if (!file) raise(Errc::io_error, "cannot write " + out);
    file << j.dump(2) << "\n";
    std::printf("%s/%s: %zu posts, narrative round %d, score %.1f -> %s\n", event.c_str(),
                target->id.c_str(), result.sequence.fragments.size(),
                result.narrative.round, result.sequence.director_score.value_or(0.0),
                out.c_str());
    return 0;
}

void print_summary(const RunSummary& summary) {
    std::printf("planned %zu  succeeded %zu  failed %zu -> %s\n", summary.planned,
                summary.succeeded, summary.failed, summary.run_dir.c_str());
    if (!summary.reports.empty())
        std::printf("%s", render_report_table(summary.reports).c_str());
}

int cmd_simulate_run(ExperimentConfig config, const std::string& out, bool ablation_sweep) {
    if (!ablation_sweep) {
        print_summary(run_experiment(config, out));
        return 0;
    }
    for (Ablation mode : {Ablation::full, Ablation::no_debate, Ablation::no_editor,
                          Ablation::single_agent}) {
        config.production.ablation = mode;
        std::printf("== ablation %s ==\n", ablation_name(mode));
        print_summary(run_experiment(config, (fs::path(out) / ablation_name(mode)).string()));
    }
    return 0;
}

int cmd_sweep_length(const ExperimentConfig& config, const std::vector<std::size_t>& lengths,
                     const std::string& out) {
    auto points = sweep_sequence_length(config, lengths, out);
    for (const auto& point : points) {
        if (point.defined)
            std::printf("length %3zu  ASR %.4f  (%zu trials) -> %s\n", point.length,
                        point.overall.asr, point.overall.n_trials, point.run_dir.c_str());
        else
            std::printf("length %3zu  ASR undefined (no successful trial) -> %s\n",
                        point.length, point.run_dir.c_str());
    }
    return 0;
}

int cmd_metrics_report(const std::string& run_dir, double hc_threshold, bool by_event) {
    if (hc_threshold <= 0.0) {
        // default comes from the persisted run config
        auto config = load_experiment_config((fs::path(run_dir) / "config.json").string());
        hc_threshold = config.victim.confidence_threshold_high;
    }
    auto reports = recompute_metrics(run_dir, hc_threshold);
    if (!by_event) {
        auto overall = reports.find("overall");
        std::map<std::string, MetricsReport> only{{"overall", overall->second}};
        std::printf("%s", render_report_table(only).c_str());
    } else {
        std::printf("%s", render_report_table(reports).c_str());
    }
    return 0;
}

std::vector<std::size_t> parse_lengths(const std::string& csv) {
    std::vector<std::size_t> lengths;
    std::size_t start = 0;
    while (start <= csv.size()) {
        auto comma = csv.find(',', start);
        auto token = csv.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!token.empty()) {
            try {
                lengths.push_back(std::stoul(token));
            } catch (const std::exception&) {
                raise(Errc::invalid_config, "bad sweep length '" + token + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (lengths.empty()) raise(Errc::invalid_config, "no sweep lengths given");
    return lengths;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"montage: cognitive collusion attack simulator"};
    app.require_subcommand(1);

    std::string log_level = "info";
    app.add_option("--log-level", log_level)->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

    auto* dataset = app.add_subcommand("dataset", "evidence bundle construction");
    dataset->require_subcommand(1);
    auto* build = dataset->add_subcommand("build", "ingest a PHEME-layout archive into event bundles");
    std::string root, out_dir;
    IngestOptions ingest;
    build->add_option("--root", root, "archive root directory")->required();
    build->add_option("--out", out_dir, "output directory for bundle JSON")->required();
    build->add_option("--dedup-threshold", ingest.dedup_threshold,
                      "token-set Jaccard threshold for dropping near-duplicate targets");
    build->add_option("--top-n", ingest.top_n, "keep at most N targets per event (0 = all)");
    build->add_option("--min-evidence", ingest.min_evidence,
                      "flag events with fewer evidence fragments than this");

    auto* templates = app.add_subcommand("templates", "prompt template management");
    templates->require_subcommand(1);
    auto* tpl_export = templates->add_subcommand("export", "write built-in templates as editable .txt files");
    std::string tpl_out;
    tpl_export->add_option("--out", tpl_out, "directory for <name>.txt files")->required();

    // shared by every config-driven subcommand
    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    std::vector<std::string> events_override;
    std::size_t targets_override = 0;
    bool targets_set = false;
    std::string ablation_override;
    std::size_t length_override = 0;
    auto add_config_options = [&](CLI::App* cmd, bool with_overrides) {
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
        if (!with_overrides) return;
        cmd->add_option("--seed", seed_override, "override root seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--events", events_override, "override event selection")
            ->delimiter(',');
        cmd->add_option("--targets-per-event", targets_override,
                        "override per-event target cap (0 = all)")
            ->each([&](const std::string&) { targets_set = true; });
        cmd->add_option("--ablation", ablation_override, "override production ablation")
            ->check(CLI::IsMember({"full", "no_debate", "no_editor", "single_agent"}));
        cmd->add_option("--target-length", length_override,
                        "override attack sequence length");
    };

    auto* attack = app.add_subcommand("attack", "narrative production");
    attack->require_subcommand(1);
    auto* produce = attack->add_subcommand("produce", "produce one attack sequence");
    std::string atk_event, atk_target, atk_out;
    add_config_options(produce, true);
    produce->add_option("--event", atk_event, "event bundle to attack")->required();
    produce->add_option("--target", atk_target, "fabrication target id (default: first)");
    produce->add_option("--out", atk_out, "output JSON file")->required();

    auto* simulate = app.add_subcommand("simulate", "end-to-end attack simulation");
    simulate->require_subcommand(1);
    auto* sim_run = simulate->add_subcommand("run", "run the configured experiment");
    std::string sim_out;
    bool ablation_sweep = false;
    add_config_options(sim_run, true);
    sim_run->add_option("--out", sim_out, "run output directory")->required();
    sim_run->add_flag("--ablation-sweep", ablation_sweep,
                      "run every ablation mode into <out>/<mode>");

    auto* sweep = simulate->add_subcommand("sweep-length", "rerun across sequence lengths");
    std::string sweep_out, sweep_lengths = "3,6,9,12,15,18";
    add_config_options(sweep, true);
    sweep->add_option("--lengths", sweep_lengths, "comma-separated sequence lengths");
    sweep->add_option("--out", sweep_out, "sweep output directory")->required();

    auto* metrics = app.add_subcommand("metrics", "metrics over persisted runs");
    metrics->require_subcommand(1);
    auto* report = metrics->add_subcommand("report", "recompute metrics from a run directory");
    std::string report_run;
    double report_hc = 0.0;
    bool report_by_event = false;
    report->add_option("--run", report_run, "run directory")->required();
    report->add_option("--hc-threshold", report_hc,
                       "confidence threshold (default: value saved with the run)");
    report->add_flag("--by-event", report_by_event, "per-event breakdown");

    auto* plot = app.add_subcommand("plot", "plot-ready data export");
    plot->require_subcommand(1);
    auto* plot_export = plot->add_subcommand("export", "flatten runs into TSV tables");
    std::vector<std::string> plot_runs;
    std::string plot_out;
    plot_export->add_option("--run", plot_runs, "run or sweep directory (repeatable)")
        ->required();
    plot_export->add_option("--out", plot_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (log_level == "debug") log::set_level(log::Level::debug);
    else if (log_level == "warn") log::set_level(log::Level::warn);
    else if (log_level == "error") log::set_level(log::Level::error);
    else if (log_level == "off") log::set_level(log::Level::off);

    try {
        if (build->parsed()) return cmd_dataset_build(root, out_dir, ingest);
        if (tpl_export->parsed()) {
            auto names = PromptLibrary::builtin().export_to_dir(tpl_out);
            for (const auto& name : names) std::printf("%s.txt\n", name.c_str());
            return 0;
        }

        auto load_with_overrides = [&]() {
            auto config = load_experiment_config(config_path);
            if (seed_set) config.seed = seed_override;
            if (!events_override.empty()) config.events = events_override;
            if (targets_set) config.targets_per_event = targets_override;
            if (!ablation_override.empty())
                config.production.ablation = ablation_from_name(ablation_override);
            if (length_override > 0) config.production.target_length = length_override;
            validate(config);
            return config;
        };

        if (produce->parsed())
            return cmd_attack_produce(load_with_overrides(), atk_event, atk_target, atk_out);
        if (sim_run->parsed())
            return cmd_simulate_run(load_with_overrides(), sim_out, ablation_sweep);
        if (sweep->parsed())
            return cmd_sweep_length(load_with_overrides(), parse_lengths(sweep_lengths),
                                    sweep_out);
        if (report->parsed()) return cmd_metrics_report(report_run, report_hc, report_by_event);
        if (plot_export->parsed()) {
            auto exported = export_plot_data(plot_runs, plot_out);
            for (const auto& file : exported.files) std::printf("%s\n", file.c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "montage: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "montage: unexpected failure: %s\n", e.what());
        return 1;
    }
    return 0;
}
