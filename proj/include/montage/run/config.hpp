#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/inject/sybil.hpp"
#include "montage/judge/downstream.hpp"
#include "montage/llm/gateway.hpp"
#include "montage/production/config.hpp"
#include "montage/victim/victim.hpp"

namespace montage {

struct BackendSpec {
    std::string kind = "scripted"; // "scripted" | "remote"
    std::string script_path;       // scripted: replay spec JSON
    std::string base_url;          // remote
    std::string model;             // remote: default model id
    std::string api_key_env = "MONTAGE_API_KEY";
    int max_concurrency = 4;
    RetryPolicy retry;
};

struct ExperimentConfig {
    std::string bundles_dir;
    std::vector<std::string> events;   // empty = every bundle in the directory
    std::size_t targets_per_event = 0; // 0 = all
    ProductionConfig production;
    VictimConfig victim;
    JudgeConfig judge;
    std::size_t bots = 5;
    AssignStrategy assignment_strategy = AssignStrategy::randomized_round_robin;
    std::optional<std::size_t> normal_count; // absent = one organic per attack post
    std::vector<std::string> strategies = {"majority_vote", "ai_judge"};
    std::string templates_dir; // empty = built-in prompts
    BackendSpec backend;
    std::uint64_t seed = 1;
    int trial_parallelism = 2;
};

void validate(const ExperimentConfig& config);

// Snapshot omits nothing an identical re-run needs; the output directory is
// passed separately so run logs stay byte-comparable across locations.
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Stable hash of the config snapshot; stamped on every trial record.
std::string config_fingerprint(const ExperimentConfig& config);

// Instantiates the configured backend (never dials out for scripted).
std::shared_ptr<Backend> make_backend(const BackendSpec& spec);

} // namespace montage
