#include "montage/run/config.hpp"

#include <fstream>
#include <set>

#include "montage/llm/remote.hpp"
#include "montage/llm/scripted.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/hash.hpp"

namespace montage {

namespace {

constexpr const char* kConfigSchema = "montage/config/1";

nlohmann::json to_json(const BackendSpec& spec) {
    nlohmann::json j{{"kind", spec.kind}};
    if (spec.kind == "scripted") {
        j["script"] = spec.script_path;
    } else {
        j["base_url"] = spec.base_url;
        j["model"] = spec.model;
        j["api_key_env"] = spec.api_key_env;
        j["max_concurrency"] = spec.max_concurrency;
        j["retry"] = {{"max_retries", spec.retry.max_retries},
                      {"base_delay_ms", spec.retry.base_delay_ms},
                      {"multiplier", spec.retry.multiplier}};
    }
    return j;
}

BackendSpec backend_from_json(const nlohmann::json& j) {
    BackendSpec spec;
    spec.kind = j.value("kind", spec.kind);
    spec.script_path = j.value("script", spec.script_path);
    spec.base_url = j.value("base_url", spec.base_url);
    spec.model = j.value("model", spec.model);
    spec.api_key_env = j.value("api_key_env", spec.api_key_env);
    spec.max_concurrency = j.value("max_concurrency", spec.max_concurrency);
    if (j.contains("retry")) {
        const auto& r = j["retry"];
        spec.retry.max_retries = r.value("max_retries", spec.retry.max_retries);
        spec.retry.base_delay_ms = r.value("base_delay_ms", spec.retry.base_delay_ms);
        spec.retry.multiplier = r.value("multiplier", spec.retry.multiplier);
    }
    return spec;
}

} // namespace

void validate(const ExperimentConfig& config) {
    if (config.bundles_dir.empty()) raise(Errc::invalid_config, "bundles_dir is required");
    if (config.bots == 0) raise(Errc::invalid_config, "bots must be >= 1");
    if (config.trial_parallelism < 1)
        raise(Errc::invalid_config, "trial_parallelism must be >= 1");
    if (config.strategies.empty())
        raise(Errc::invalid_config, "at least one downstream strategy is required");
    std::set<std::string> seen;
    for (const auto& strategy : config.strategies) {
        decision_strategy_from_name(strategy); // throws on unknown names
        if (!seen.insert(strategy).second)
            raise(Errc::invalid_config, "duplicate strategy " + strategy);
    }
    validate(config.production);
    validate(config.victim);
    if (config.backend.kind == "scripted") {
        if (config.backend.script_path.empty())
            raise(Errc::invalid_config, "scripted backend needs a script path");
    } else if (config.backend.kind == "remote") {
        if (config.backend.base_url.empty() || config.backend.model.empty())
            raise(Errc::invalid_config, "remote backend needs base_url and model");
        if (config.backend.max_concurrency < 1)
            raise(Errc::invalid_config, "max_concurrency must be >= 1");
    } else {
        raise(Errc::invalid_config, "unknown backend kind '" + config.backend.kind + "'");
    }
}

nlohmann::json to_json(const ExperimentConfig& config) {
    nlohmann::json j{{"schema", kConfigSchema},
                     {"bundles_dir", config.bundles_dir},
                     {"targets_per_event",
                      config.targets_per_event == 0
                          ? nlohmann::json("all")
                          : nlohmann::json(config.targets_per_event)},
                     {"production", to_json(config.production)},
                     {"victim", to_json(config.victim)},
                     {"judge", to_json(config.judge)},
                     {"bots", config.bots},
                     {"assignment_strategy", assign_strategy_name(config.assignment_strategy)},
                     {"strategies", config.strategies},
                     {"backend", to_json(config.backend)},
                     {"seed", config.seed},
                     {"trial_parallelism", config.trial_parallelism}};
    j["events"] = config.events.empty() ? nlohmann::json("all") : nlohmann::json(config.events);
    j["normal_count"] =
        config.normal_count ? nlohmann::json(*config.normal_count) : nlohmann::json("match");
    if (!config.templates_dir.empty()) j["templates_dir"] = config.templates_dir;
    return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (j.contains("schema") && j["schema"] != kConfigSchema)
        raise(Errc::invalid_config,
              "unsupported config schema " + j["schema"].dump() + " (want montage/config/1)");
    ExperimentConfig config;
    config.bundles_dir = j.value("bundles_dir", config.bundles_dir);
    if (j.contains("events") && j["events"].is_array())
        config.events = j["events"].get<std::vector<std::string>>();
    if (j.contains("targets_per_event") && j["targets_per_event"].is_number())
        config.targets_per_event = j["targets_per_event"].get<std::size_t>();
    if (j.contains("production")) config.production = production_config_from_json(j["production"]);
    if (j.contains("victim")) config.victim = victim_config_from_json(j["victim"]);
    if (j.contains("judge")) config.judge = judge_config_from_json(j["judge"]);
    config.bots = j.value("bots", config.bots);
    if (j.contains("assignment_strategy"))
        config.assignment_strategy =
            assign_strategy_from_name(j["assignment_strategy"].get<std::string>());
    if (j.contains("normal_count") && j["normal_count"].is_number())
        config.normal_count = j["normal_count"].get<std::size_t>();
    if (j.contains("strategies"))
        config.strategies = j["strategies"].get<std::vector<std::string>>();
    config.templates_dir = j.value("templates_dir", config.templates_dir);
    if (j.contains("backend")) config.backend = backend_from_json(j["backend"]);
    config.seed = j.value("seed", config.seed);
    config.trial_parallelism = j.value("trial_parallelism", config.trial_parallelism);
    validate(config);
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot read config " + path);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) raise(Errc::parse_error, "config " + path + " is not valid JSON");
    return experiment_config_from_json(j);
}

std::string config_fingerprint(const ExperimentConfig& config) {
    return to_hex(fnv1a64(to_json(config).dump()));
}

std::shared_ptr<Backend> make_backend(const BackendSpec& spec) {
    if (spec.kind == "scripted")
        return std::make_shared<ScriptedBackend>(ScriptedBackendSpec::load_file(spec.script_path));
    RemoteEndpointConfig remote;
    remote.base_url = spec.base_url;
    remote.default_model = spec.model;
    remote.api_key_env = spec.api_key_env;
    return std::make_shared<RemoteBackend>(remote);
}

} // namespace montage
