#pragma once

#include <string>
#include <vector>

#include "montage/core/types.hpp"
#include "montage/dataset/pheme.hpp"

namespace montage {

struct BundleStats {
    std::size_t evidence_count = 0;
    std::size_t target_count = 0;
    double avg_cascade = 0.0; // mean historical_cascade over targets
};

// One event's evidence pool plus its ranked, deduplicated fabrications.
struct EventBundle {
    std::string event_name;
    std::vector<EvidenceFragment> evidence_pool;
    std::vector<TargetFabrication> targets;
    BundleStats stats;
    bool low_evidence = false; // pool smaller than the configured minimum
};

struct IngestOptions {
    double dedup_threshold = 0.8;
    std::size_t top_n = 0;        // 0 = unlimited
    std::size_t min_evidence = 50;
};

EventBundle build_bundle(const std::string& event_name,
                         const std::vector<RawThread>& event_threads,
                         const IngestOptions& options);

// Groups threads by event (name ascending) and bundles each.
std::vector<EventBundle> build_bundles(const std::vector<RawThread>& threads,
                                       const IngestOptions& options);

void validate(const EventBundle& bundle);
Json to_json(const EventBundle& bundle);
EventBundle event_bundle_from_json(const Json& j);

void save_bundle(const EventBundle& bundle, const std::string& path);
EventBundle load_bundle(const std::string& path);

// Every *.json bundle under dir, sorted by event name.
std::vector<EventBundle> load_bundles_dir(const std::string& dir);

} // namespace montage
