#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "montage/core/text.hpp"
#include "montage/dataset/bundle.hpp"
#include "montage/llm/scripted.hpp"
#include "montage/run/config.hpp"
#include "montage/run/plots.hpp"
#include "montage/run/runner.hpp"
#include "montage/run/sweep.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/jsonl.hpp"
#include "montage/util/logging.hpp"

namespace fs = std::filesystem;
using namespace montage;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "montage_run_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

EventBundle make_bundle(const std::string& event, const std::string& prefix,
                        const std::string& claim) {
    EventBundle bundle;
    bundle.event_name = event;
    const char* facts[] = {"one", "two", "three", "four"};
    std::int64_t ts = 1000;
    for (const char* word : facts) {
        EvidenceFragment f;
        f.id = prefix + "-f-" + word;
        f.text = "Fact " + prefix + " " + word + ".";
        f.timestamp = ts;
        f.source_event = event;
        f.veracity_label = "true";
        bundle.evidence_pool.push_back(std::move(f));
        ts += 100;
    }
    const char* fillers[] = {"weather", "traffic", "sports", "market"};
    for (const char* word : fillers) {
        EvidenceFragment f;
        f.id = prefix + "-bg-" + word;
        f.text = "Background " + prefix + " " + word + " report.";
        f.timestamp = ts;
        f.source_event = event;
        f.veracity_label = "true";
        bundle.evidence_pool.push_back(std::move(f));
        ts += 100;
    }
    TargetFabrication target;
    target.id = "t1";
    target.claim_text = claim;
    target.real_counterpart = "Nothing of the sort was established.";
    target.source_event = event;
    target.historical_cascade = 5;
    bundle.targets.push_back(std::move(target));
    bundle.stats = {bundle.evidence_pool.size(), bundle.targets.size(), 5.0};
    return bundle;
}

ScriptedEntry entry(RoleTag role, std::string text, std::string match = "", int uses = -1) {
    ScriptedEntry e;
    e.role = role;
    e.text = std::move(text);
    e.match = std::move(match);
    e.uses = uses;
    return e;
}

// accept-everything world: every trial succeeds, alpha victims adopt the
// fabrication with high confidence, beta victims do not
std::vector<ScriptedEntry> standard_script() {
    return {
        entry(RoleTag::writer, "Fact alpha one. Fact alpha two. Fact alpha three.",
              "narrative about the event \"alpha-event\""),
        entry(RoleTag::writer, "Fact beta one. Fact beta two. Fact beta three.",
              "narrative about the event \"beta-event\""),
        // single-agent prompts arrive under the writer role but lack the
        // "narrative about" phrase, so they fall through to these
        entry(RoleTag::writer,
              "POST 1: Fact alpha one.\nPOST 2: Fact alpha two.\nPOST 3: Fact alpha three.",
              "posts about \"alpha-event\""),
        entry(RoleTag::writer,
              "POST 1: Fact beta one.\nPOST 2: Fact beta two.\nPOST 3: Fact beta three.",
              "posts about \"beta-event\""),
        entry(RoleTag::director, "SCORE: 8.5\nVERDICT: [ACCEPT]\nCRITIQUE: tight causal chain."),
        entry(RoleTag::editor,
              "POST 1: Fact alpha one.\nPOST 2: Fact alpha two.\nPOST 3: Fact alpha three.\n"
              "ORDER 1: 1, 2, 3",
              "\"alpha-event\""),
        entry(RoleTag::editor,
              "POST 1: Fact beta one.\nPOST 2: Fact beta two.\nPOST 3: Fact beta three.\n"
              "ORDER 1: 1, 2, 3",
              "\"beta-event\""),
        entry(RoleTag::victim,
              "VERDICT: TRUE\nCONFIDENCE: 0.90\nRATIONALE: the posts build one chain.",
              "Alpha claim one"),
        entry(RoleTag::victim,
              "VERDICT: FALSE\nCONFIDENCE: 0.40\nRATIONALE: sourcing is thin.",
              "Beta claim one"),
        entry(RoleTag::judge, "VERDICT: TRUE\nRATIONALE: analyst consensus is strong.",
              "Alpha claim one"),
        entry(RoleTag::judge, "VERDICT: FALSE\nRATIONALE: reports contradict the feed.",
              "Beta claim one"),
    };
}

void write_script(const fs::path& path, const std::vector<ScriptedEntry>& entries) {
    ScriptedBackendSpec spec;
    spec.entries = entries;
    std::ofstream file(path, std::ios::binary);
    file << spec.to_json().dump(2) << "\n";
}

// bundles/ + script.json under a fresh scratch root
fs::path setup_fixture(const std::string& name, const std::vector<ScriptedEntry>& entries) {
    auto root = fresh_dir(name);
    fs::create_directories(root / "bundles");
    save_bundle(make_bundle("alpha-event", "alpha", "Alpha claim one."),
                (root / "bundles" / "alpha-event.json").string());
    save_bundle(make_bundle("beta-event", "beta", "Beta claim one."),
                (root / "bundles" / "beta-event.json").string());
    write_script(root / "script.json", entries);
    return root;
}

ExperimentConfig base_config(const fs::path& root) {
    ExperimentConfig config;
    config.bundles_dir = (root / "bundles").string();
    config.production.target_length = 3;
    config.victim.k_victims = 3;
    config.bots = 2;
    config.assignment_strategy = AssignStrategy::round_robin;
    config.backend.kind = "scripted";
    config.backend.script_path = (root / "script.json").string();
    config.seed = 77;
    return config;
}

std::map<std::string, int> role_counts(const std::string& run_dir,
                                       const std::string& trial_id = "") {
    std::map<std::string, int> counts;
    for (const auto& rec : read_jsonl(run_dir + "/transcripts/calls.jsonl")) {
        if (!trial_id.empty() && rec.at("trial_id").get<std::string>() != trial_id) continue;
        ++counts[rec.at("role").get<std::string>()];
    }
    return counts;
}

std::vector<json> trial_records(const std::string& run_dir) {
    std::vector<json> trials;
    for (auto& rec : read_jsonl(run_dir + "/run.jsonl"))
        if (rec.value("type", "") == "trial") trials.push_back(std::move(rec));
    return trials;
}

std::vector<std::string> attack_texts(const json& trial) {
    std::vector<std::string> texts;
    for (const auto& post : trial.at("feed"))
        if (post.at("origin") == "attack") texts.push_back(post.at("text").get<std::string>());
    return texts;
}

} // namespace

TEST_CASE("runner: full run produces the artifact set and exact metrics") {
    auto root = setup_fixture("full", standard_script());
    auto config = base_config(root);
    auto summary = run_experiment(config, (root / "run").string());

    CHECK(summary.planned == 2);
    CHECK(summary.succeeded == 2);
    CHECK(summary.failed == 0);
    for (const char* name :
         {"run.jsonl", "config.json", "metrics.json", "metrics.txt", "transcripts/calls.jsonl"})
        CHECK(fs::exists(root / "run" / name));

    // hand-computed: alpha 3×(TRUE,0.9) and beta 3×(FALSE,0.4)
    const auto& overall = summary.reports.at("overall");
    CHECK(overall.asr == doctest::Approx(0.5));
    CHECK(overall.conf == doctest::Approx(0.65));
    CHECK(overall.hc_asr == doctest::Approx(0.5));
    CHECK(overall.ddr.at("majority_vote") == doctest::Approx(0.5));
    CHECK(overall.ddr.at("ai_judge") == doctest::Approx(0.5));
    CHECK(overall.n_trials == 2);
    CHECK(overall.n_evaluations == 6);
    CHECK(summary.reports.at("alpha-event").asr == doctest::Approx(1.0));
    CHECK(summary.reports.at("beta-event").asr == doctest::Approx(0.0));

    auto records = read_jsonl((root / "run" / "run.jsonl").string());
    REQUIRE(records.size() == 3);
    CHECK(records[0].at("type") == "run");
    CHECK(records[0].at("schema") == "montage/run/1");
    CHECK(records[0].at("trials_planned") == 2);
    CHECK(records[0].at("backend") == "scripted");

    auto trials = trial_records((root / "run").string());
    REQUIRE(trials.size() == 2);
    const auto fingerprint = config_fingerprint(config);
    for (const auto& trial : trials) {
        CHECK(trial.at("status") == "ok");
        CHECK(trial.at("config_fingerprint") == fingerprint);
        CHECK(trial.at("verdicts").size() == 3);
        CHECK(trial.at("bots").size() == 2);
        // 3 attack posts + 3 organic (default: one per attack post)
        CHECK(trial.at("feed").size() == 6);
        CHECK(trial.at("decisions").contains("majority_vote"));
        CHECK(trial.at("decisions").contains("ai_judge"));
    }
    CHECK(trials[0].at("trial_id") == "alpha-event/t1");
    CHECK(attack_texts(trials[0]) ==
          std::vector<std::string>{"Fact alpha one.", "Fact alpha two.", "Fact alpha three."});
    for (const auto& post : trials[0].at("feed")) {
        if (post.at("origin") == "attack")
            CHECK(post.at("author").get<std::string>().substr(0, 4) == "bot-");
        else
            CHECK(post.at("author") == "organic");
    }

    // full pattern per trial: writer, director×2, editor, 3 victims, judge
    auto counts = role_counts((root / "run").string(), "alpha-event/t1");
    CHECK(counts["writer"] == 1);
    CHECK(counts["director"] == 2);
    CHECK(counts["editor"] == 1);
    CHECK(counts["victim"] == 3);
    CHECK(counts["judge"] == 1);
}

TEST_CASE("runner: reruns are identical modulo wall-clock fields") {
    auto root = setup_fixture("determinism", standard_script());
    auto config = base_config(root);
    run_experiment(config, (root / "a").string());
    run_experiment(config, (root / "b").string());

    for (const char* name : {"run.jsonl", "transcripts/calls.jsonl"}) {
        auto a = read_jsonl((root / "a" / name).string());
        auto b = read_jsonl((root / "b" / name).string());
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(strip_wall_clock(a[i]) == strip_wall_clock(b[i]));
    }
    for (const char* name : {"config.json", "metrics.json", "metrics.txt"}) {
        std::ifstream fa(root / "a" / name, std::ios::binary);
        std::ifstream fb(root / "b" / name, std::ios::binary);
        std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        CHECK(a == b);
    }
}

TEST_CASE("runner: single-agent ablation makes no director or editor calls") {
    auto root = setup_fixture("single-agent", standard_script());
    auto config = base_config(root);
    config.production.ablation = Ablation::single_agent;
    auto summary = run_experiment(config, (root / "run").string());
    CHECK(summary.succeeded == 2);

    auto counts = role_counts((root / "run").string());
    CHECK(counts["director"] == 0);
    CHECK(counts["editor"] == 0);
    CHECK(counts["writer"] == 2); // exactly one per trial
    CHECK(counts["victim"] == 6);

    for (const auto& trial : trial_records((root / "run").string())) {
        CHECK(!trial.at("production").contains("writer_trace"));
        CHECK(!trial.at("production").contains("editor_trace"));
    }
}

TEST_CASE("runner: no-debate ablation gates exactly once per loop") {
    // a director that would never approve: no_debate must still settle each
    // loop in one round with a single gate call
    auto script = standard_script();
    for (auto& e : script)
        if (e.role == RoleTag::director)
            e.text = "SCORE: 2.0\nVERDICT: [REVISE]\nCRITIQUE: not persuasive enough.";
    auto root = setup_fixture("no-debate", script);
    auto config = base_config(root);
    config.production.ablation = Ablation::no_debate;
    auto summary = run_experiment(config, (root / "run").string());
    CHECK(summary.succeeded == 2);

    for (const char* trial_id : {"alpha-event/t1", "beta-event/t1"}) {
        auto counts = role_counts((root / "run").string(), trial_id);
        CHECK(counts["director"] == 2);
        CHECK(counts["writer"] == 1);
        CHECK(counts["editor"] == 1);
    }
    for (const auto& trial : trial_records((root / "run").string())) {
        CHECK(trial.at("production").at("writer_trace").at("rounds").size() == 1);
        CHECK(trial.at("production").at("editor_trace").at("rounds").size() == 1);
        CHECK(trial.at("sequence").at("director_score") == doctest::Approx(2.0));
    }
}

TEST_CASE("runner: no-editor ablation slices the narrative in order") {
    auto root = setup_fixture("no-editor", standard_script());
    auto config = base_config(root);
    config.production.ablation = Ablation::no_editor;
    auto summary = run_experiment(config, (root / "run").string());
    CHECK(summary.succeeded == 2);

    auto counts = role_counts((root / "run").string());
    CHECK(counts["editor"] == 0);
    CHECK(counts["director"] == 2); // one writer gate per trial, no sequence gate

    auto trials = trial_records((root / "run").string());
    for (const auto& trial : trials) {
        const auto narrative = trial.at("production").at("narrative").at("text").get<std::string>();
        CHECK(attack_texts(trial) == slice_into_parts(narrative, 3));
        CHECK(!trial.at("production").contains("editor_trace"));
    }
    CHECK(attack_texts(trials[0]) ==
          std::vector<std::string>{"Fact alpha one.", "Fact alpha two.", "Fact alpha three."});
}

TEST_CASE("runner: failed trials are excluded and the run continues") {
    auto script = standard_script();
    for (auto& e : script)
        if (e.role == RoleTag::writer && e.match.find("beta") != std::string::npos)
            e.text = "Unrelated gossip chatter with no support."; // fails every fact check
    auto root = setup_fixture("fail-beta", script);
    auto config = base_config(root);
    auto summary = run_experiment(config, (root / "run").string());

    CHECK(summary.planned == 2);
    CHECK(summary.succeeded == 1);
    CHECK(summary.failed == 1);
    CHECK(summary.reports.count("alpha-event") == 1);
    CHECK(summary.reports.count("beta-event") == 0);
    CHECK(summary.reports.at("overall").n_trials == 1);

    auto trials = trial_records((root / "run").string());
    REQUIRE(trials.size() == 2);
    CHECK(trials[0].at("status") == "ok");
    CHECK(trials[1].at("status") == "failed");
    const auto error = trials[1].at("error").get<std::string>();
    CHECK(error.find("production-failed") != std::string::npos);
    CHECK(!trials[1].contains("verdicts"));
}

TEST_CASE("runner: every trial failing leaves metrics undefined") {
    auto script = standard_script();
    for (auto& e : script)
        if (e.role == RoleTag::writer && e.match.find("narrative") != std::string::npos)
            e.text = "Unrelated gossip chatter with no support.";
    auto root = setup_fixture("fail-all", script);
    auto summary = run_experiment(base_config(root), (root / "run").string());
    CHECK(summary.succeeded == 0);
    CHECK(summary.failed == 2);
    CHECK(summary.reports.empty());

    std::ifstream mtxt(root / "run" / "metrics.txt", std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(mtxt)), std::istreambuf_iterator<char>());
    CHECK(text == "no successful trials; metrics undefined\n");
    CHECK_THROWS_WITH_AS(recompute_metrics((root / "run").string(), 0.8),
                         doctest::Contains("no successful trials"), Error);
}

TEST_CASE("runner: replay recomputes the persisted metrics exactly") {
    auto root = setup_fixture("replay", standard_script());
    auto config = base_config(root);
    run_experiment(config, (root / "run").string());

    auto trials = load_trials_from_run((root / "run").string());
    REQUIRE(trials.size() == 2);
    CHECK(trials[0].event == "alpha-event");
    CHECK(trials[1].event == "beta-event");

    std::ifstream mfile(root / "run" / "metrics.json", std::ios::binary);
    json persisted;
    mfile >> persisted;
    auto recomputed =
        recompute_metrics((root / "run").string(), persisted.at("hc_threshold").get<double>());
    REQUIRE(persisted.at("reports").size() == recomputed.size());
    for (const auto& [name, report] : recomputed)
        CHECK(persisted.at("reports").at(name) == to_json(report)); // bit-for-bit

    CHECK_THROWS_WITH_AS(load_trials_from_run((root / "nowhere").string()),
                         doctest::Contains("no run.jsonl"), Error);
}

TEST_CASE("runner: invalid configuration aborts before anything is written") {
    auto root = setup_fixture("invalid", standard_script());
    auto config = base_config(root);
    config.strategies = {"coin_flip"};
    CHECK_THROWS_WITH_AS(run_experiment(config, (root / "run").string()),
                         doctest::Contains("coin_flip"), Error);
    CHECK(!fs::exists(root / "run" / "run.jsonl"));

    auto config2 = base_config(root);
    config2.events = {"gamma-event"};
    CHECK_THROWS_WITH_AS(run_experiment(config2, (root / "run2").string()),
                         doctest::Contains("no bundle for event 'gamma-event'"), Error);
    CHECK(!fs::exists(root / "run2" / "run.jsonl"));
}

namespace {

// editor reply with n posts cycling the alpha fact pool, one identity order
std::string posts_reply(std::size_t n) {
    const char* words[] = {"one", "two", "three", "four"};
    std::string reply;
    for (std::size_t i = 0; i < n; ++i)
        reply += "POST " + std::to_string(i + 1) + ": Fact alpha " + words[i % 4] + ".\n";
    reply += "ORDER 1:";
    for (std::size_t i = 0; i < n; ++i) reply += " " + std::to_string(i + 1);
    return reply;
}

fs::path sweep_fixture() {
    std::vector<ScriptedEntry> script = {
        entry(RoleTag::writer, "Fact alpha one. Fact alpha two. Fact alpha three.",
              "narrative about the event \"alpha-event\""),
        entry(RoleTag::director, "SCORE: 8.5\nVERDICT: [ACCEPT]\nCRITIQUE: fine."),
        entry(RoleTag::editor, posts_reply(3), "at most 3 short"),
        entry(RoleTag::editor, posts_reply(12), "at most 12 short"),
        entry(RoleTag::editor, posts_reply(18), "at most 18 short"),
        // belief lands only at the mid sequence length
        entry(RoleTag::victim,
              "VERDICT: TRUE\nCONFIDENCE: 0.90\nRATIONALE: the chain is airtight.",
              "(12 posts)"),
        entry(RoleTag::victim, "VERDICT: FALSE\nCONFIDENCE: 0.30\nRATIONALE: too sparse.",
              "(3 posts)"),
        entry(RoleTag::victim, "VERDICT: FALSE\nCONFIDENCE: 0.30\nRATIONALE: diluted."),
    };
    return setup_fixture("sweep", script);
}

} // namespace

TEST_CASE("sweep: attack success peaks at the tuned sequence length") {
    auto root = sweep_fixture();
    auto config = base_config(root);
    config.events = {"alpha-event"};
    config.strategies = {"majority_vote"};
    config.normal_count = 0; // victims see exactly target_length posts

    auto points = sweep_sequence_length(config, {3, 12, 18}, (root / "sweep").string());
    REQUIRE(points.size() == 3);
    for (const auto& point : points) REQUIRE(point.defined);
    CHECK(points[0].length == 3);
    CHECK(points[1].length == 12);
    CHECK(points[2].length == 18);
    CHECK(points[1].overall.asr > points[0].overall.asr);
    CHECK(points[1].overall.asr > points[2].overall.asr);
    CHECK(points[0].overall.asr == doctest::Approx(0.0));
    CHECK(points[1].overall.asr == doctest::Approx(1.0));

    CHECK(fs::exists(root / "sweep" / "sweep.json"));
    CHECK(fs::exists(root / "sweep" / "sweep.txt"));
    CHECK(fs::exists(root / "sweep" / "len-012" / "run.jsonl"));

    std::ifstream sfile(root / "sweep" / "sweep.json", std::ios::binary);
    json sweep_j;
    sfile >> sweep_j;
    CHECK(sweep_j.at("schema") == "montage/sweep/1");
    REQUIRE(sweep_j.at("points").size() == 3);
    CHECK(sweep_j.at("points")[1].at("overall").at("asr") == doctest::Approx(1.0));

    CHECK_THROWS_WITH_AS(sweep_sequence_length(config, {}, (root / "sweep2").string()),
                         doctest::Contains("at least one length"), Error);
}

TEST_CASE("plots: runs and sweeps flatten into TSV tables") {
    auto root = setup_fixture("plots", standard_script());
    auto config = base_config(root);
    run_experiment(config, (root / "run").string());

    auto sweep_root = sweep_fixture();
    auto sweep_config = base_config(sweep_root);
    sweep_config.events = {"alpha-event"};
    sweep_config.strategies = {"majority_vote"};
    sweep_config.normal_count = 0;
    sweep_sequence_length(sweep_config, {3, 12}, (sweep_root / "sweep").string());

    auto exported = export_plot_data(
        {(root / "run").string(), (sweep_root / "sweep").string()}, (root / "plots").string());
    REQUIRE(exported.files.size() == 2);

    std::ifstream ddr(root / "plots" / "ddr_by_event.tsv", std::ios::binary);
    std::string header, row1, row2;
    std::getline(ddr, header);
    std::getline(ddr, row1);
    std::getline(ddr, row2);
    CHECK(header == "run\tstrategy\talpha-event\tbeta-event");
    CHECK(row1 == "run\tai_judge\t1.0000\t0.0000");
    CHECK(row2 == "run\tmajority_vote\t1.0000\t0.0000");

    std::ifstream asr(root / "plots" / "asr_by_length.tsv", std::ios::binary);
    std::getline(asr, header);
    std::getline(asr, row1);
    std::getline(asr, row2);
    CHECK(header == "length\tasr\thc_asr\tconf\tn_trials");
    CHECK(row1.substr(0, 9) == "3\t0.0000\t");
    CHECK(row2.substr(0, 10) == "12\t1.0000\t");

    CHECK_THROWS_AS(export_plot_data({}, (root / "plots").string()), Error);
    auto empty = fresh_dir("plots-empty");
    CHECK_THROWS_WITH_AS(export_plot_data({empty.string()}, (root / "plots").string()),
                         doctest::Contains("neither metrics.json nor sweep.json"), Error);
}

TEST_CASE("config: snapshot round-trips and fingerprints are stable") {
    auto root = setup_fixture("config-roundtrip", standard_script());
    auto config = base_config(root);
    config.events = {"alpha-event"};
    config.targets_per_event = 1;
    config.normal_count = 4;
    config.templates_dir = "";

    auto j = to_json(config);
    CHECK(j.at("schema") == "montage/config/1");
    auto back = experiment_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(config_fingerprint(back) == config_fingerprint(config));

    auto changed = config;
    changed.seed = 78;
    CHECK(config_fingerprint(changed) != config_fingerprint(config));

    json bad = j;
    bad["schema"] = "montage/config/999";
    CHECK_THROWS_WITH_AS(experiment_config_from_json(bad), doctest::Contains("schema"), Error);
}

TEST_CASE("cli: simulate run and metrics report round-trip through the binary") {
    auto root = setup_fixture("cli", standard_script());
    auto config = base_config(root);
    const auto config_path = (root / "experiment.json").string();
    {
        std::ofstream file(config_path, std::ios::binary);
        file << to_json(config).dump(2) << "\n";
    }
    const std::string bin = MONTAGE_CLI_BIN;
    const auto run_dir = (root / "run").string();

    int rc = std::system((bin + " --log-level off simulate run --config " + config_path +
                          " --out " + run_dir + " > " + (root / "run.out").string() + " 2>&1")
                             .c_str());
    REQUIRE(rc == 0);
    CHECK(fs::exists(root / "run" / "metrics.json"));

    rc = std::system((bin + " --log-level off metrics report --run " + run_dir + " --by-event > " +
                      (root / "report.out").string() + " 2>&1")
                         .c_str());
    REQUIRE(rc == 0);
    std::ifstream out(root / "report.out", std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(out)), std::istreambuf_iterator<char>());
    CHECK(text.find("alpha-event") != std::string::npos);
    CHECK(text.find("overall") != std::string::npos);
    CHECK(text.find("0.5000") != std::string::npos);

    rc = std::system((bin + " --log-level off metrics report --run " + (root / "missing").string() +
                      " > /dev/null 2>&1")
                         .c_str());
    CHECK(rc != 0);
}
