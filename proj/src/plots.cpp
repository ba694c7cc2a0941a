#include "montage/run/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "montage/util/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace montage {

namespace {

json load_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(Errc::parse_error, path.string() + ": " + e.what());
    }
    return j;
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct DdrRow {
    std::string run;
    std::string strategy;
    std::map<std::string, double> by_event; // event -> ddr
};

} // namespace

PlotExport export_plot_data(const std::vector<std::string>& run_dirs,
                            const std::string& out_dir) {
    if (run_dirs.empty()) raise(Errc::invalid_input, "no run directories given");

    std::vector<DdrRow> ddr_rows;
    std::set<std::string> events;
    // length -> (asr, hc_asr, conf, run_dir); map keeps the output sorted
    std::map<std::size_t, json> sweep_points;

    for (const auto& dir : run_dirs) {
        const fs::path metrics_path = fs::path(dir) / "metrics.json";
        const fs::path sweep_path = fs::path(dir) / "sweep.json";
        bool found = false;
        const std::string run_name = fs::path(dir).filename().string().empty()
                                         ? fs::path(dir).parent_path().filename().string()
                                         : fs::path(dir).filename().string();

        if (fs::exists(metrics_path)) {
            found = true;
            json m = load_json_file(metrics_path);
            std::map<std::string, std::size_t> row_of; // strategy -> ddr_rows index
            for (const auto& [scope, report] : m.at("reports").items()) {
                if (scope == "overall") continue;
                events.insert(scope);
                if (!report.contains("ddr")) continue;
                for (const auto& [strategy, value] : report.at("ddr").items()) {
                    auto it = row_of.find(strategy);
                    if (it == row_of.end()) {
                        ddr_rows.push_back({run_name, strategy, {}});
                        it = row_of.emplace(strategy, ddr_rows.size() - 1).first;
                    }
                    ddr_rows[it->second].by_event[scope] = value.get<double>();
                }
            }
        }
        if (fs::exists(sweep_path)) {
            found = true;
            json s = load_json_file(sweep_path);
            for (const auto& point : s.at("points")) {
                if (!point.contains("overall")) continue;
                sweep_points[point.at("length").get<std::size_t>()] = point;
            }
        }
        if (!found)
            raise(Errc::missing_run, dir + " has neither metrics.json nor sweep.json");
    }

    std::stable_sort(ddr_rows.begin(), ddr_rows.end(), [](const DdrRow& a, const DdrRow& b) {
        if (a.run != b.run) return a.run < b.run;
        return a.strategy < b.strategy;
    });

    fs::create_directories(out_dir);
    PlotExport result;

    if (!ddr_rows.empty()) {
        const fs::path out = fs::path(out_dir) / "ddr_by_event.tsv";
        std::ofstream tsv(out, std::ios::binary);
        tsv << "run\tstrategy";
        for (const auto& event : events) tsv << "\t" << event;
        tsv << "\n";
        for (const auto& row : ddr_rows) {
            tsv << row.run << "\t" << row.strategy;
            for (const auto& event : events) {
                auto it = row.by_event.find(event);
                tsv << "\t" << (it == row.by_event.end() ? "-" : fmt4(it->second));
            }
            tsv << "\n";
        }
        result.files.push_back(out.string());
    }

    if (!sweep_points.empty()) {
        const fs::path out = fs::path(out_dir) / "asr_by_length.tsv";
        std::ofstream tsv(out, std::ios::binary);
        tsv << "length\tasr\thc_asr\tconf\tn_trials\n";
        for (const auto& [length, point] : sweep_points) {
            const json& overall = point.at("overall");
            tsv << length << "\t" << fmt4(overall.at("asr").get<double>()) << "\t"
                << fmt4(overall.at("hc_asr").get<double>()) << "\t"
                << fmt4(overall.at("conf").get<double>()) << "\t"
                << overall.at("n_trials").get<std::size_t>() << "\n";
        }
        result.files.push_back(out.string());
    }

    return result;
}

} // namespace montage
