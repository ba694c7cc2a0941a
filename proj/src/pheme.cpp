#include "montage/dataset/pheme.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>

#include "montage/core/text.hpp"
#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace fs = std::filesystem;

namespace montage {

namespace {

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return j;
}

// Annotation values appear as "1", 1, or true depending on the archive vintage.
int flag_value(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return 0;
    const auto& v = j[key];
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (v.is_string()) {
        const auto& s = v.get<std::string>();
        if (s == "1") return 1;
        if (s == "0" || s.empty()) return 0;
    }
    return 0;
}

std::string normalize_label(std::string label) {
    for (auto& c : label) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (label == "non-rumour" || label == "nonrumour" || label == "nonrumor") return "non-rumor";
    return label;
}

// PHEME annotations come in two shapes: an explicit veracity/label field, or
// the rumour-flag triple (is_rumour, true, misinformation).
std::string derive_label(const nlohmann::json& annotation) {
    for (const char* key : {"veracity", "label"}) {
        if (annotation.contains(key) && annotation[key].is_string()) {
            return normalize_label(annotation[key].get<std::string>());
        }
    }
    if (annotation.contains("is_rumour") && annotation["is_rumour"].is_string()) {
        auto kind = normalize_label(annotation["is_rumour"].get<std::string>());
        if (kind == "non-rumor") return "non-rumor";
    }
    int truthful = flag_value(annotation, "true");
    int misinformation = flag_value(annotation, "misinformation");
    if (truthful == 1 && misinformation == 0) return "true";
    if (misinformation == 1 && truthful == 0) return "false";
    if (truthful == 1 && misinformation == 1) return "conflicting";
    return "unverified";
}

std::optional<fs::path> find_source_dir(const fs::path& thread_dir) {
    for (const char* name : {"source-tweets", "source-tweet", "source_posts"}) {
        auto p = thread_dir / name;
        if (fs::is_directory(p)) return p;
    }
    return std::nullopt;
}

std::optional<fs::path> pick_source_file(const fs::path& source_dir,
                                         const std::string& thread_id) {
    auto preferred = source_dir / (thread_id + ".json");
    if (fs::is_regular_file(preferred)) return preferred;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(source_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) return std::nullopt;
    std::sort(files.begin(), files.end());
    return files.front();
}

std::int64_t count_reactions(const fs::path& thread_dir) {
    std::int64_t n = 0;
    for (const char* name : {"reactions", "replies"}) {
        auto dir = thread_dir / name;
        if (!fs::is_directory(dir)) continue;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") ++n;
        }
    }
    return n;
}

std::int64_t source_timestamp(const nlohmann::json& source) {
    if (source.contains("created_at")) {
        const auto& v = source["created_at"];
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_string()) return parse_twitter_time(v.get<std::string>());
    }
    if (source.contains("timestamp") && source["timestamp"].is_number_integer()) {
        return source["timestamp"].get<std::int64_t>();
    }
    return -1;
}

void scan_event(const fs::path& event_dir, const std::string& event_name,
                std::vector<RawThread>& out, ParseStats& stats) {
    // A thread folder is any directory holding a source-post subdirectory.
    std::vector<fs::path> thread_dirs;
    for (const auto& entry : fs::recursive_directory_iterator(event_dir)) {
        if (entry.is_directory() && find_source_dir(entry.path())) {
            thread_dirs.push_back(entry.path());
        }
    }
    std::sort(thread_dirs.begin(), thread_dirs.end());

    for (const auto& dir : thread_dirs) {
        stats.threads += 1;
        auto thread_id = dir.filename().string();
        auto annotation_path = dir / "annotation.json";
        if (!fs::is_regular_file(annotation_path)) {
            log::warn("thread " + thread_id + " has no annotation record, skipping");
            stats.skipped += 1;
            continue;
        }
        auto source_dir = find_source_dir(dir);
        auto source_file = pick_source_file(*source_dir, thread_id);
        if (!source_file) {
            log::warn("thread " + thread_id + " has no source post record, skipping");
            stats.skipped += 1;
            continue;
        }

        nlohmann::json annotation, source;
        try {
            annotation = read_json_file(annotation_path);
            source = read_json_file(*source_file);
        } catch (const std::exception& e) {
            log::warn("thread " + thread_id + " unreadable (" + e.what() + "), skipping");
            stats.skipped += 1;
            continue;
        }

        RawThread thread;
        thread.thread_id = thread_id;
        thread.event = event_name;
        if (source.contains("text") && source["text"].is_string()) {
            thread.text = source["text"].get<std::string>();
        } else if (source.contains("full_text") && source["full_text"].is_string()) {
            thread.text = source["full_text"].get<std::string>();
        }
        if (normalize_text(thread.text).empty()) {
            log::warn("thread " + thread_id + " has an empty source text, skipping");
            stats.skipped += 1;
            continue;
        }
        thread.timestamp = source_timestamp(source);
        if (thread.timestamp <= 0) {
            log::warn("thread " + thread_id + " has an unparseable timestamp, skipping");
            stats.skipped += 1;
            continue;
        }
        thread.reactions = count_reactions(dir);
        thread.label = derive_label(annotation);
        out.push_back(std::move(thread));
    }
}

} // namespace

std::int64_t parse_twitter_time(const std::string& created_at) {
    std::tm tm{};
    // "Wed Jan 07 11:06:08 +0000 2015"
    const char* rest = strptime(created_at.c_str(), "%a %b %d %H:%M:%S %z %Y", &tm);
    if (rest && *rest == '\0') {
        auto offset = tm.tm_gmtoff; // timegm normalizes the struct, save first
        return timegm(&tm) - offset;
    }
    tm = {};
    rest = strptime(created_at.c_str(), "%Y-%m-%dT%H:%M:%S", &tm);
    if (rest && (*rest == '\0' || *rest == 'Z')) {
        return timegm(&tm);
    }
    return -1;
}

std::vector<RawThread> parse_archive(const std::string& root, ParseStats* stats) {
    if (!fs::is_directory(root)) {
        raise(Errc::io_error, "archive root is not a directory: " + root);
    }
    ParseStats local;
    std::vector<RawThread> threads;

    std::vector<fs::path> event_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) event_dirs.push_back(entry.path());
    }
    std::sort(event_dirs.begin(), event_dirs.end());
    for (const auto& event_dir : event_dirs) {
        scan_event(event_dir, event_dir.filename().string(), threads, local);
    }

    std::sort(threads.begin(), threads.end(), [](const RawThread& a, const RawThread& b) {
        if (a.event != b.event) return a.event < b.event;
        return a.thread_id < b.thread_id;
    });
    if (stats) *stats = local;
    return threads;
}

Partition partition_threads(const std::vector<RawThread>& threads) {
    Partition out;
    for (const auto& thread : threads) {
        if (thread.label == "true" || thread.label == "non-rumor") {
            out.evidence.push_back(thread);
        } else if (thread.label == "false" || thread.label == "unverified") {
            out.candidates.push_back(thread);
        } else {
            log::warn("thread " + thread.thread_id + " has unknown label '" + thread.label +
                      "', rejected");
            out.rejected.push_back(thread);
        }
    }
    return out;
}

std::string negate_claim(const std::string& claim) {
    return "It is not established that " + claim;
}

std::vector<TargetFabrication> dedup_and_rank(const std::vector<RawThread>& candidates,
                                              double similarity_threshold, std::size_t top_n) {
    if (similarity_threshold <= 0.0 || similarity_threshold > 1.0) {
        raise(Errc::invalid_config, "dedup threshold must be in (0,1]");
    }

    std::vector<const RawThread*> ordered;
    ordered.reserve(candidates.size());
    for (const auto& c : candidates) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(), [](const RawThread* a, const RawThread* b) {
        auto ca = 1 + a->reactions;
        auto cb = 1 + b->reactions;
        if (ca != cb) return ca > cb;
        return a->thread_id < b->thread_id;
    });

    std::vector<TargetFabrication> retained;
    std::vector<std::set<std::string>> retained_tokens;
    for (const RawThread* c : ordered) {
        auto tokens = token_set(c->text);
        bool duplicate = false;
        for (const auto& kept : retained_tokens) {
            if (token_jaccard(tokens, kept) >= similarity_threshold) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        TargetFabrication target;
        target.id = c->thread_id;
        target.claim_text = c->text;
        target.real_counterpart = negate_claim(c->text);
        target.source_event = c->event;
        target.historical_cascade = 1 + c->reactions;
        retained.push_back(std::move(target));
        retained_tokens.push_back(std::move(tokens));
        if (top_n != 0 && retained.size() == top_n) break;
    }
    return retained;
}

} // namespace montage
