#pragma once

#include <map>
#include <string>
#include <vector>

#include "montage/metrics/metrics.hpp"
#include "montage/run/config.hpp"

namespace montage {

struct RunSummary {
    std::string run_dir;
    std::size_t planned = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    // per-event reports plus "overall"; empty when no trial succeeded
    std::map<std::string, MetricsReport> reports;
};

// Runs the full attack plan (every selected event × target) against the
// configured backend. The directory receives run.jsonl, config.json,
// metrics.json, metrics.txt, and transcripts/calls.jsonl. Individual trial
// failures are recorded in the log and excluded from metrics; the run keeps
// going.
RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir);

// Replays the successful trials of a persisted run, in logical trial order.
std::vector<TrialResult> load_trials_from_run(const std::string& run_dir);

// Recomputes the metrics of a persisted run from its trial records.
std::map<std::string, MetricsReport> recompute_metrics(const std::string& run_dir,
                                                       double hc_threshold);

} // namespace montage
