#include "montage/dataset/bundle.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "montage/util/errors.hpp"

namespace fs = std::filesystem;

namespace montage {

EventBundle build_bundle(const std::string& event_name,
                         const std::vector<RawThread>& event_threads,
                         const IngestOptions& options) {
    auto parts = partition_threads(event_threads);

    EventBundle bundle;
    bundle.event_name = event_name;
    for (const auto& thread : parts.evidence) {
        EvidenceFragment fragment;
        fragment.id = thread.thread_id;
        fragment.text = thread.text;
        fragment.timestamp = thread.timestamp;
        fragment.source_event = thread.event;
        fragment.veracity_label = thread.label;
        fragment.cascade_size = 1 + thread.reactions;
        validate(fragment);
        bundle.evidence_pool.push_back(std::move(fragment));
    }
    std::sort(bundle.evidence_pool.begin(), bundle.evidence_pool.end(),
              [](const EvidenceFragment& a, const EvidenceFragment& b) {
                  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                  return a.id < b.id;
              });

    bundle.targets = dedup_and_rank(parts.candidates, options.dedup_threshold, options.top_n);

    bundle.stats.evidence_count = bundle.evidence_pool.size();
    bundle.stats.target_count = bundle.targets.size();
    if (!bundle.targets.empty()) {
        double sum = 0.0;
        for (const auto& t : bundle.targets) sum += static_cast<double>(t.historical_cascade);
        bundle.stats.avg_cascade = sum / static_cast<double>(bundle.targets.size());
    }
    bundle.low_evidence = bundle.evidence_pool.size() < options.min_evidence;
    return bundle;
}

std::vector<EventBundle> build_bundles(const std::vector<RawThread>& threads,
                                       const IngestOptions& options) {
    std::map<std::string, std::vector<RawThread>> by_event;
    for (const auto& thread : threads) by_event[thread.event].push_back(thread);

    std::vector<EventBundle> bundles;
    bundles.reserve(by_event.size());
    for (const auto& [event, group] : by_event) {
        bundles.push_back(build_bundle(event, group, options));
    }
    return bundles;
}

void validate(const EventBundle& bundle) {
    if (bundle.event_name.empty()) raise(Errc::invalid_input, "bundle needs an event name");
    if (bundle.stats.evidence_count != bundle.evidence_pool.size() ||
        bundle.stats.target_count != bundle.targets.size()) {
        raise(Errc::invalid_input, "bundle stats disagree with its contents");
    }
    for (const auto& fragment : bundle.evidence_pool) validate(fragment);
    for (const auto& target : bundle.targets) validate(target);
    for (std::size_t i = 1; i < bundle.targets.size(); ++i) {
        if (bundle.targets[i].historical_cascade > bundle.targets[i - 1].historical_cascade) {
            raise(Errc::invalid_input, "targets not sorted by cascade descending");
        }
    }
}

Json to_json(const EventBundle& bundle) {
    Json evidence = Json::array();
    for (const auto& fragment : bundle.evidence_pool) evidence.push_back(to_json(fragment));
    Json targets = Json::array();
    for (const auto& target : bundle.targets) targets.push_back(to_json(target));
    return Json{
        {"schema", "copheme/1"},
        {"event_name", bundle.event_name},
        {"evidence_pool", std::move(evidence)},
        {"targets", std::move(targets)},
        {"stats",
         {{"evidence_count", bundle.stats.evidence_count},
          {"target_count", bundle.stats.target_count},
          {"avg_cascade", bundle.stats.avg_cascade}}},
        {"low_evidence", bundle.low_evidence},
    };
}

EventBundle event_bundle_from_json(const Json& j) {
    if (!j.is_object() || j.value("schema", "") != "copheme/1") {
        raise(Errc::parse_error, "bundle: expected schema copheme/1");
    }
    EventBundle bundle;
    bundle.event_name = j.at("event_name").get<std::string>();
    for (const auto& e : j.at("evidence_pool")) {
        bundle.evidence_pool.push_back(evidence_fragment_from_json(e));
    }
    for (const auto& t : j.at("targets")) {
        bundle.targets.push_back(target_fabrication_from_json(t));
    }
    const auto& stats = j.at("stats");
    bundle.stats.evidence_count = stats.at("evidence_count").get<std::size_t>();
    bundle.stats.target_count = stats.at("target_count").get<std::size_t>();
    bundle.stats.avg_cascade = stats.at("avg_cascade").get<double>();
    bundle.low_evidence = j.value("low_evidence", false);
    validate(bundle);
    return bundle;
}

void save_bundle(const EventBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write bundle to " + path);
    out << to_json(bundle).dump(2) << "\n";
    if (!out) raise(Errc::io_error, "short write on " + path);
}

EventBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open bundle " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse_error, "bad bundle " + path + ": " + e.what());
    }
    return event_bundle_from_json(j);
}

std::vector<EventBundle> load_bundles_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) raise(Errc::io_error, "bundle dir missing: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<EventBundle> bundles;
    for (const auto& file : files) bundles.push_back(load_bundle(file.string()));
    std::sort(bundles.begin(), bundles.end(), [](const EventBundle& a, const EventBundle& b) {
        return a.event_name < b.event_name;
    });
    return bundles;
}

} // namespace montage
