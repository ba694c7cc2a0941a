#include "montage/util/errors.hpp"
#include "montage/util/hash.hpp"
#include "montage/util/logging.hpp"
#include "montage/util/rng.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace montage {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_config: return "invalid-config";
    case Errc::parse_error: return "parse-error";
    case Errc::io_error: return "io-error";
    case Errc::script_exhausted: return "script-exhausted";
    case Errc::call_failed: return "call-failed";
    case Errc::evaluation_failed: return "evaluation-failed";
    case Errc::production_failed: return "production-failed";
    case Errc::malformed_decomposition: return "malformed-decomposition";
    case Errc::undefined_metric: return "undefined-metric";
    case Errc::missing_run: return "missing-run";
    }
    return "error";
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    std::uint64_t h = fnv1a64(stream);
    // One splitmix round over the combined state keeps substreams decorrelated
    // even for adjacent roots.
    std::uint64_t z = root ^ (h + 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace log {

namespace {
std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

const char* level_tag(Level level) {
    switch (level) {
    case Level::debug: return "DEBUG";
    case Level::info: return "INFO";
    case Level::warn: return "WARN";
    case Level::error: return "ERROR";
    default: return "";
    }
}
} // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void write(Level level, const std::string& message) {
    if (level < g_level.load()) return;
    std::scoped_lock lock(g_mutex);
    std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

} // namespace log

} // namespace montage
