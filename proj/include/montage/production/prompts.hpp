#pragma once

#include <map>
#include <string>
#include <vector>

#include "montage/llm/backend.hpp"

namespace montage {

// Named prompt templates with {{placeholder}} substitution. Built-in texts
// ship in the binary; a templates directory may override any of them with a
// <name>.txt file. Rendering fails loudly on placeholders left unfilled;
// extra values are ignored so custom templates may drop placeholders.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    static PromptLibrary from_dir(const std::string& dir);

    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& values) const;
    const std::string& raw(const std::string& name) const;
    bool has(const std::string& name) const { return templates_.count(name) > 0; }
    const std::map<std::string, std::string>& all() const { return templates_; }

    // Writes every template to <dir>/<name>.txt; returns the names written.
    std::vector<std::string> export_to_dir(const std::string& dir) const;

private:
    std::map<std::string, std::string> templates_;
};

// Per-role system prompts (not template files; fixed agent identities).
std::string system_prompt_for(RoleTag role);

} // namespace montage
