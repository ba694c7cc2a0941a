#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "montage/dataset/bundle.hpp"
#include "montage/dataset/pheme.hpp"
#include "montage/util/errors.hpp"

using namespace montage;
namespace fs = std::filesystem;

namespace {

std::string fixture_dir() { return std::string(MONTAGE_FIXTURE_DIR); }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

RawThread cand(std::string id, std::string text, std::int64_t reactions) {
    RawThread t;
    t.thread_id = std::move(id);
    t.event = "ev";
    t.text = std::move(text);
    t.timestamp = 1000;
    t.reactions = reactions;
    t.label = "false";
    return t;
}

} // namespace

TEST_CASE("parse_twitter_time handles offsets and rejects garbage") {
    CHECK(parse_twitter_time("Wed Jan 07 11:06:08 +0000 2015") == 1420628768);
    // +0100 means one hour ahead of UTC, so the instant is one hour earlier
    CHECK(parse_twitter_time("Wed Jan 07 11:06:08 +0100 2015") == 1420628768 - 3600);
    CHECK(parse_twitter_time("2015-01-07T10:06:08Z") == 1420625168);
    CHECK(parse_twitter_time("not a time") == -1);
    CHECK(parse_twitter_time("") == -1);
}

TEST_CASE("mini archive parses with one skipped thread") {
    ParseStats stats;
    auto threads = parse_archive(fixture_dir() + "/mini_pheme", &stats);
    CHECK(stats.threads == 30);
    CHECK(stats.skipped == 1); // the annotation-less folder
    REQUIRE(threads.size() == 29);

    // sorted by (event, thread_id)
    CHECK(threads.front().event == "alpha-event");
    CHECK(threads.front().thread_id == "1000101");
    CHECK(threads.back().event == "beta-event");
    CHECK(threads.back().thread_id == "2000202");

    // label derivation across annotation shapes
    auto find = [&](const std::string& id) {
        for (const auto& t : threads)
            if (t.thread_id == id) return t;
        FAIL("thread not found: ", id);
        return RawThread{};
    };
    CHECK(find("1000101").label == "non-rumor");
    CHECK(find("1000105").label == "true");  // string flags
    CHECK(find("1000106").label == "true");  // integer flags
    CHECK(find("1000107").label == "true");  // direct veracity
    CHECK(find("1000201").label == "false");
    CHECK(find("1000207").label == "unverified");
    CHECK(find("1000301").label == "satire");
    CHECK(find("1000201").reactions == 9);
    CHECK(find("1000101").timestamp == 1420629000); // Jan 07 2015 11:10:00Z
}

TEST_CASE("partition splits by label and rejects unknowns") {
    auto threads = parse_archive(fixture_dir() + "/mini_pheme");
    auto parts = partition_threads(threads);
    CHECK(parts.evidence.size() == 16);
    CHECK(parts.candidates.size() == 12);
    CHECK(parts.rejected.size() == 1);
    CHECK(parts.rejected[0].label == "satire");
    CHECK(parts.evidence.size() + parts.candidates.size() + parts.rejected.size() ==
          threads.size());
}

TEST_CASE("dedup_and_rank drops duplicates greedily by cascade") {
    auto threads = parse_archive(fixture_dir() + "/mini_pheme");
    auto parts = partition_threads(threads);
    std::vector<RawThread> alpha;
    for (const auto& t : parts.candidates)
        if (t.event == "alpha-event") alpha.push_back(t);
    REQUIRE(alpha.size() == 10);

    auto targets = dedup_and_rank(alpha, 0.8);
    std::vector<std::string> ids;
    for (const auto& t : targets) ids.push_back(t.id);
    // 1000202 is a case-only duplicate of 1000201 (Jaccard 1.0);
    // 1000204 differs from 1000203 by one token in ten (Jaccard 9/11 >= 0.8)
    CHECK(ids == std::vector<std::string>{"1000201", "1000203", "1000205", "1000206",
                                          "1000207", "1000208", "1000209", "1000210"});
    CHECK(targets[0].historical_cascade == 10);
    CHECK(targets[1].historical_cascade == 8);
    CHECK(targets.back().historical_cascade == 1);
    CHECK(targets[0].real_counterpart ==
          "It is not established that " + targets[0].claim_text);

    // a stricter threshold keeps the near-duplicate pair apart
    auto loose = dedup_and_rank(alpha, 0.9);
    CHECK(loose.size() == 9);

    auto capped = dedup_and_rank(alpha, 0.8, 3);
    REQUIRE(capped.size() == 3);
    CHECK(capped[2].id == "1000205");

    CHECK_THROWS_AS(dedup_and_rank(alpha, 0.0), Error);
    CHECK_THROWS_AS(dedup_and_rank(alpha, 1.5), Error);
}

TEST_CASE("dedup_and_rank breaks cascade ties by thread id") {
    std::vector<RawThread> tied{cand("b", "wholly unrelated text one", 4),
                                cand("a", "完全 distinct claim two", 4),
                                cand("c", "third different statement", 9)};
    auto targets = dedup_and_rank(tied, 0.8);
    REQUIRE(targets.size() == 3);
    CHECK(targets[0].id == "c");
    CHECK(targets[1].id == "a");
    CHECK(targets[2].id == "b");
}

TEST_CASE("build_bundles computes stats and low-evidence flags") {
    auto threads = parse_archive(fixture_dir() + "/mini_pheme");
    IngestOptions options;
    options.min_evidence = 10;
    auto bundles = build_bundles(threads, options);
    REQUIRE(bundles.size() == 2);

    const auto& alpha = bundles[0];
    CHECK(alpha.event_name == "alpha-event");
    CHECK(alpha.stats.evidence_count == 12);
    CHECK(alpha.stats.target_count == 8);
    // retained cascades 10+8+6+5+4+3+2+1 = 39; 39/8 = 4.875
    CHECK(alpha.stats.avg_cascade == doctest::Approx(4.875));
    CHECK_FALSE(alpha.low_evidence);
    validate(alpha);

    const auto& beta = bundles[1];
    CHECK(beta.event_name == "beta-event");
    CHECK(beta.stats.evidence_count == 4);
    CHECK(beta.stats.target_count == 2);
    CHECK(beta.stats.avg_cascade == doctest::Approx(4.0)); // (5 + 3) / 2
    CHECK(beta.low_evidence);

    // evidence sorted by timestamp ascending
    for (std::size_t i = 1; i < alpha.evidence_pool.size(); ++i) {
        CHECK(alpha.evidence_pool[i - 1].timestamp <= alpha.evidence_pool[i].timestamp);
    }
    for (const auto& fragment : alpha.evidence_pool) {
        CHECK((fragment.veracity_label == "true" || fragment.veracity_label == "non-rumor"));
    }
}

TEST_CASE("bundle JSON round trip and byte-stable reingestion") {
    auto threads = parse_archive(fixture_dir() + "/mini_pheme");
    IngestOptions options;
    options.min_evidence = 10;
    auto bundles = build_bundles(threads, options);

    for (const auto& bundle : bundles) {
        auto j = to_json(bundle);
        auto back = event_bundle_from_json(j);
        CHECK(to_json(back) == j);
    }

    auto again = build_bundles(parse_archive(fixture_dir() + "/mini_pheme"), options);
    REQUIRE(again.size() == bundles.size());
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        CHECK(to_json(again[i]).dump(2) == to_json(bundles[i]).dump(2));
    }
}

TEST_CASE("bundles match golden files byte for byte") {
    auto threads = parse_archive(fixture_dir() + "/mini_pheme");
    IngestOptions options;
    options.min_evidence = 10;
    auto bundles = build_bundles(threads, options);
    REQUIRE(bundles.size() == 2);

    for (const auto& bundle : bundles) {
        auto tmp = fs::temp_directory_path() / ("montage_golden_" + bundle.event_name + ".json");
        save_bundle(bundle, tmp.string());
        auto produced = read_file(tmp.string());
        auto golden = read_file(fixture_dir() + "/golden/" + bundle.event_name + ".json");
        CHECK(produced == golden);
        fs::remove(tmp);
    }
}

TEST_CASE("parse_archive skips unparseable timestamps") {
    auto root = fs::temp_directory_path() / "montage_badts";
    fs::remove_all(root);
    auto dir = root / "ev" / "rumours" / "42";
    fs::create_directories(dir / "source-tweets");
    std::ofstream(dir / "source-tweets" / "42.json")
        << R"({"id": 42, "text": "hello", "created_at": "yesterday-ish"})";
    std::ofstream(dir / "annotation.json") << R"({"veracity": "true"})";

    ParseStats stats;
    auto threads = parse_archive(root.string(), &stats);
    CHECK(threads.empty());
    CHECK(stats.threads == 1);
    CHECK(stats.skipped == 1);
    fs::remove_all(root);
}

TEST_CASE("load_bundle rejects foreign schemas") {
    auto path = fs::temp_directory_path() / "montage_bad_bundle.json";
    std::ofstream(path) << R"({"schema": "other/9", "event_name": "x"})";
    CHECK_THROWS_AS(load_bundle(path.string()), Error);
    fs::remove(path);
}
