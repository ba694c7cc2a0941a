#include "montage/util/jsonl.hpp"

#include <fstream>

#include "montage/util/errors.hpp"

namespace montage {

void append_jsonl(const std::string& path, const nlohmann::json& record) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open " + path + " for append");
    out << record.dump() << "\n";
    if (!out) raise(Errc::io_error, "write to " + path + " failed");
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io_error, "cannot read " + path);
    std::vector<nlohmann::json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": invalid JSON");
        records.push_back(std::move(j));
    }
    return records;
}

namespace {

const char* kWallClockKeys[] = {"wall_ms", "latency_ms", "started_utc", "finished_utc"};

} // namespace

nlohmann::json strip_wall_clock(nlohmann::json j) {
    if (j.is_object()) {
        for (const char* key : kWallClockKeys) j.erase(key);
        for (auto& [key, value] : j.items()) value = strip_wall_clock(std::move(value));
    } else if (j.is_array()) {
        for (auto& value : j) value = strip_wall_clock(std::move(value));
    }
    return j;
}

} // namespace montage
