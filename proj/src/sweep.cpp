#include "montage/run/sweep.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace fs = std::filesystem;

namespace montage {

std::vector<SweepPoint> sweep_sequence_length(ExperimentConfig config,
                                              const std::vector<std::size_t>& lengths,
                                              const std::string& out_root) {
    if (lengths.empty()) raise(Errc::invalid_config, "sweep needs at least one length");
    validate(config);
    fs::create_directories(out_root);

    std::vector<SweepPoint> points;
    for (std::size_t length : lengths) {
        config.production.target_length = length;
        validate(config.production);
        char name[32];
        std::snprintf(name, sizeof(name), "len-%03zu", length);
        const std::string run_dir = (fs::path(out_root) / name).string();
        log::info("sweep: running target_length=" + std::to_string(length));
        auto summary = run_experiment(config, run_dir);

        SweepPoint point;
        point.length = length;
        point.run_dir = run_dir;
        auto it = summary.reports.find("overall");
        if (it != summary.reports.end()) {
            point.overall = it->second;
            point.defined = true;
        }
        points.push_back(std::move(point));
    }

    nlohmann::json sweep_j{{"schema", "montage/sweep/1"}};
    nlohmann::json points_j = nlohmann::json::array();
    for (const auto& point : points) {
        nlohmann::json p{{"length", point.length}, {"run_dir", point.run_dir}};
        if (point.defined) p["overall"] = to_json(point.overall);
        points_j.push_back(std::move(p));
    }
    sweep_j["points"] = std::move(points_j);
    std::ofstream js(fs::path(out_root) / "sweep.json", std::ios::binary);
    js << sweep_j.dump(2) << "\n";

    std::ofstream table(fs::path(out_root) / "sweep.txt", std::ios::binary);
    table << "length     ASR  HC-ASR    Conf  trials\n";
    for (const auto& point : points) {
        char line[96];
        if (point.defined)
            std::snprintf(line, sizeof(line), "%6zu  %6.4f  %6.4f  %6.4f  %6zu\n", point.length,
                          point.overall.asr, point.overall.hc_asr, point.overall.conf,
                          point.overall.n_trials);
        else
            std::snprintf(line, sizeof(line), "%6zu       -       -       -       0\n",
                          point.length);
        table << line;
    }
    return points;
}

} // namespace montage
