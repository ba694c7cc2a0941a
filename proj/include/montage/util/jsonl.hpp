#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace montage {

// One compact JSON object per line.
void append_jsonl(const std::string& path, const nlohmann::json& record);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// Removes timing fields (recursively) so two runs of the same seed compare
// equal; everything else in a run log is deterministic.
nlohmann::json strip_wall_clock(nlohmann::json j);

} // namespace montage
