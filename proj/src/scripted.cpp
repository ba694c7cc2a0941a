#include "montage/llm/scripted.hpp"

#include <fstream>

#include "montage/util/errors.hpp"

namespace montage {

ScriptedBackendSpec ScriptedBackendSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array()) {
        raise(Errc::parse_error, "scripted spec: expected object with an entries array");
    }
    if (j.contains("schema") && j["schema"] != "scripted/1") {
        raise(Errc::parse_error, "scripted spec: unsupported schema " + j["schema"].dump());
    }
    ScriptedBackendSpec spec;
    for (const auto& e : j["entries"]) {
        if (!e.is_object() || !e.contains("role") || !e.contains("text")) {
            raise(Errc::parse_error, "scripted spec: entry needs role and text");
        }
        ScriptedEntry entry;
        entry.role = role_tag_from_name(e["role"].get<std::string>());
        entry.text = e["text"].get<std::string>();
        entry.match = e.value("match", std::string{});
        entry.uses = e.value("uses", 1);
        if (entry.uses == 0 || entry.uses < -1) {
            raise(Errc::parse_error, "scripted spec: uses must be positive or -1");
        }
        spec.entries.push_back(std::move(entry));
    }
    return spec;
}

ScriptedBackendSpec ScriptedBackendSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open script file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::parse_error, "bad script file " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ScriptedBackendSpec::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json je{{"role", role_tag_name(e.role)}, {"text", e.text}};
        if (!e.match.empty()) je["match"] = e.match;
        if (e.uses != 1) je["uses"] = e.uses;
        arr.push_back(std::move(je));
    }
    return nlohmann::json{{"schema", "scripted/1"}, {"entries", std::move(arr)}};
}

ScriptedBackend::ScriptedBackend(ScriptedBackendSpec spec) : calls_per_role_(6, 0) {
    slots_.reserve(spec.entries.size());
    for (auto& entry : spec.entries) {
        int remaining = entry.uses;
        slots_.push_back(Slot{std::move(entry), remaining});
    }
}

BackendReply ScriptedBackend::complete(const ChatRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    calls_per_role_[static_cast<int>(request.role_tag)] += 1;
    for (auto& slot : slots_) {
        if (slot.entry.role != request.role_tag) continue;
        if (slot.remaining == 0) continue;
        if (!slot.entry.match.empty() &&
            request.user_prompt.find(slot.entry.match) == std::string::npos) {
            continue;
        }
        if (slot.remaining > 0) slot.remaining -= 1;
        return BackendReply::success(slot.entry.text);
    }
    raise(Errc::script_exhausted,
          std::string("no scripted entry left for role ") + role_tag_name(request.role_tag) +
              " (call " + std::to_string(calls_per_role_[static_cast<int>(request.role_tag)]) +
              " for that role)");
}

int ScriptedBackend::calls_for(RoleTag role) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_per_role_[static_cast<int>(role)];
}

} // namespace montage
