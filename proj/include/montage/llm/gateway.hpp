#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "montage/llm/backend.hpp"

namespace montage {

struct RetryPolicy {
    int max_retries = 3;           // attempts = 1 + max_retries
    std::int64_t base_delay_ms = 1000;
    double multiplier = 2.0;

    std::int64_t delay_for_attempt(int attempt) const; // attempt is 1-based
};

// Per-call annotation for the transcript; prompts never carry it.
struct CallContext {
    std::string trial_id;
};

struct TranscriptEntry {
    std::int64_t call_id = 0;
    std::string trial_id;
    RoleTag role = RoleTag::writer;
    std::string request_hash; // hex fnv1a over role/model/params/prompts
    std::string system_prompt;
    std::string user_prompt;
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 0;
    std::string response_text;
    int attempt = 1;
    bool failed = false;
    std::string error;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    std::int64_t latency_ms = 0; // wall clock; excluded from determinism checks
};

nlohmann::json to_json(const TranscriptEntry& entry);

// Single chokepoint for model calls: retry with exponential backoff, an
// in-flight concurrency cap, and transcript capture for every call.
class Gateway {
public:
    using SleepFn = std::function<void(std::chrono::milliseconds)>;
    using TranscriptSink = std::function<void(const TranscriptEntry&)>;

    Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry = {}, int max_concurrency = 4);

    ChatResponse complete(const ChatRequest& request, const CallContext& context = {});

    // Swap the real sleep out in tests.
    void set_sleep_fn(SleepFn fn) { sleep_ = std::move(fn); }
    // Invoked after each completed call, in call-id order under the lock.
    void set_transcript_sink(TranscriptSink sink);

    std::vector<TranscriptEntry> transcript() const;
    std::size_t call_count() const;
    std::size_t calls_tagged(RoleTag role) const;
    const std::string& backend_name() const { return backend_name_; }

private:
    std::shared_ptr<Backend> backend_;
    std::string backend_name_;
    RetryPolicy retry_;
    SleepFn sleep_;
    TranscriptSink sink_;

    struct Semaphore {
        explicit Semaphore(int slots) : slots_(slots) {}
        void acquire();
        void release();
        std::mutex m;
        std::condition_variable_any cv;
        int slots_;
    };
    mutable std::mutex transcript_mutex_;
    std::vector<TranscriptEntry> transcript_;
    std::int64_t next_call_id_ = 1;
    std::unique_ptr<Semaphore> limiter_;
};

std::string request_hash(const ChatRequest& request);

} // namespace montage
