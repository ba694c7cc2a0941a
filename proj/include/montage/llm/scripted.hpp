#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/llm/backend.hpp"

namespace montage {

// One canned response. Entries are consumed per role in listed order; an
// optional `match` substring restricts an entry to prompts containing it, and
// `uses` caps how often it may serve (-1 = unlimited).
struct ScriptedEntry {
    RoleTag role = RoleTag::writer;
    std::string text;
    std::string match;
    int uses = 1;
};

struct ScriptedBackendSpec {
    std::vector<ScriptedEntry> entries;

    static ScriptedBackendSpec from_json(const nlohmann::json& j);
    static ScriptedBackendSpec load_file(const std::string& path);
    nlohmann::json to_json() const;
};

// Deterministic test backend: replays canned entries, never improvises, and
// fails loudly once a role runs out of matching ones.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(ScriptedBackendSpec spec);

    BackendReply complete(const ChatRequest& request) override;
    std::string name() const override { return "scripted"; }

    // 1-based number of calls served so far for a role.
    int calls_for(RoleTag role) const;

private:
    struct Slot {
        ScriptedEntry entry;
        int remaining; // -1 = unlimited
    };

    mutable std::mutex mutex_;
    std::vector<Slot> slots_;
    std::vector<int> calls_per_role_;
};

} // namespace montage
