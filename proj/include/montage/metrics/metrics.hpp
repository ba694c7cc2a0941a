#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/core/types.hpp"
#include "montage/judge/downstream.hpp"

namespace montage {

// Everything the metrics need from one attacked (event, target) pair.
struct TrialResult {
    std::string event;
    std::string target_id;
    std::vector<VictimVerdict> verdicts;
    std::map<std::string, DownstreamDecision> decisions; // keyed by strategy name
    std::string config_fingerprint;
};

nlohmann::json to_json(const TrialResult& trial);
TrialResult trial_from_json(const nlohmann::json& j);

struct MetricsReport {
    double asr = 0.0;
    double conf = 0.0;
    double hc_asr = 0.0;
    std::map<std::string, double> ddr;
    std::size_t n_trials = 0;
    std::size_t n_evaluations = 0;
};

nlohmann::json to_json(const MetricsReport& report);

// Share of all verdicts that adopted the fabrication.
double compute_asr(const std::vector<TrialResult>& trials);

// Mean confidence over all verdicts.
double compute_conf(const std::vector<TrialResult>& trials);

// Share of all verdicts that adopted the fabrication with confidence at or
// above the threshold.
double compute_hc_asr(const std::vector<TrialResult>& trials, double threshold);

// Share of trials whose downstream decision for the strategy accepted.
double compute_ddr(const std::vector<TrialResult>& trials, const std::string& strategy);

// Full report over one trial set; ddr covers every strategy present in all
// trials.
MetricsReport compute_report(const std::vector<TrialResult>& trials, double hc_threshold);

// Per-event reports plus "overall": the unweighted mean of per-event rates.
std::map<std::string, MetricsReport> compute_by_event(const std::vector<TrialResult>& trials,
                                                      double hc_threshold);

// Aligned plain-text table of one or more named reports.
std::string render_report_table(const std::map<std::string, MetricsReport>& reports);

} // namespace montage
