#include "montage/llm/gateway.hpp"

#include <cmath>
#include <cstdio>
#include <thread>

#include "montage/util/errors.hpp"
#include "montage/util/hash.hpp"
#include "montage/util/logging.hpp"

namespace montage {

const char* role_tag_name(RoleTag tag) {
    switch (tag) {
        case RoleTag::writer: return "writer";
        case RoleTag::editor: return "editor";
        case RoleTag::director: return "director";
        case RoleTag::victim: return "victim";
        case RoleTag::judge: return "judge";
        case RoleTag::entailment: return "entailment";
    }
    return "unknown";
}

RoleTag role_tag_from_name(const std::string& name) {
    if (name == "writer") return RoleTag::writer;
    if (name == "editor") return RoleTag::editor;
    if (name == "director") return RoleTag::director;
    if (name == "victim") return RoleTag::victim;
    if (name == "judge") return RoleTag::judge;
    if (name == "entailment") return RoleTag::entailment;
    raise(Errc::parse_error, "unknown role tag: " + name);
}

std::int64_t RetryPolicy::delay_for_attempt(int attempt) const {
    if (attempt < 1) attempt = 1;
    double delay = static_cast<double>(base_delay_ms) *
                   std::pow(multiplier, static_cast<double>(attempt - 1));
    if (delay < static_cast<double>(base_delay_ms)) delay = static_cast<double>(base_delay_ms);
    if (delay > 300000.0) delay = 300000.0;
    return static_cast<std::int64_t>(delay);
}

std::string request_hash(const ChatRequest& request) {
    std::uint64_t h = fnv1a64(role_tag_name(request.role_tag));
    h = fnv1a64(request.model_id, h ^ kFnvPrime);
    char params[64];
    std::snprintf(params, sizeof(params), "|t=%.6f|m=%d|", request.temperature,
                  request.max_tokens);
    h = fnv1a64(params, h);
    h = fnv1a64(request.system_prompt, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(request.user_prompt, h);
    return to_hex(h);
}

nlohmann::json to_json(const TranscriptEntry& entry) {
    return nlohmann::json{
        {"call_id", entry.call_id},
        {"trial_id", entry.trial_id},
        {"role", role_tag_name(entry.role)},
        {"request_hash", entry.request_hash},
        {"system_prompt", entry.system_prompt},
        {"user_prompt", entry.user_prompt},
        {"model_id", entry.model_id},
        {"temperature", entry.temperature},
        {"max_tokens", entry.max_tokens},
        {"response_text", entry.response_text},
        {"attempt", entry.attempt},
        {"failed", entry.failed},
        {"error", entry.error},
        {"prompt_tokens", entry.prompt_tokens},
        {"completion_tokens", entry.completion_tokens},
        {"latency_ms", entry.latency_ms},
    };
}

void Gateway::Semaphore::acquire() {
    std::unique_lock<std::mutex> lock(m);
    cv.wait(lock, [this] { return slots_ > 0; });
    slots_ -= 1;
}

void Gateway::Semaphore::release() {
    {
        std::lock_guard<std::mutex> lock(m);
        slots_ += 1;
    }
    cv.notify_one();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, int max_concurrency)
    : backend_(std::move(backend)), retry_(retry) {
    if (!backend_) raise(Errc::invalid_config, "gateway needs a backend");
    if (max_concurrency < 1) raise(Errc::invalid_config, "max_concurrency must be >= 1");
    if (retry_.max_retries < 0) raise(Errc::invalid_config, "max_retries must be >= 0");
    backend_name_ = backend_->name();
    sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    limiter_ = std::make_unique<Semaphore>(max_concurrency);
}

void Gateway::set_transcript_sink(TranscriptSink sink) {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    sink_ = std::move(sink);
}

ChatResponse Gateway::complete(const ChatRequest& request, const CallContext& context) {
    limiter_->acquire();
    struct Release {
        Semaphore* s;
        ~Release() { s->release(); }
    } release{limiter_.get()};

    TranscriptEntry entry;
    entry.trial_id = context.trial_id;
    entry.role = request.role_tag;
    entry.request_hash = request_hash(request);
    entry.system_prompt = request.system_prompt;
    entry.user_prompt = request.user_prompt;
    entry.model_id = request.model_id;
    entry.temperature = request.temperature;
    entry.max_tokens = request.max_tokens;

    const int max_attempts = 1 + retry_.max_retries;
    BackendReply reply;
    std::string attempt_log;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto started = std::chrono::steady_clock::now();
        try {
            reply = backend_->complete(request);
        } catch (const Error& e) {
            // Backend-raised errors (script exhaustion, config problems) keep
            // their category; record the failed call, then let them surface.
            entry.attempt = attempt;
            entry.failed = true;
            entry.error = e.what();
            std::lock_guard<std::mutex> lock(transcript_mutex_);
            entry.call_id = next_call_id_++;
            transcript_.push_back(entry);
            if (sink_) sink_(entry);
            throw;
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        entry.attempt = attempt;
        entry.latency_ms = elapsed.count();
        if (reply.status == BackendReply::Status::ok) break;
        if (!attempt_log.empty()) attempt_log += "; ";
        attempt_log += "attempt " + std::to_string(attempt) + ": " + reply.error;
        if (reply.status == BackendReply::Status::fatal) break;
        if (attempt < max_attempts) {
            auto delay = std::chrono::milliseconds(retry_.delay_for_attempt(attempt));
            log::warn("transient backend error (" + reply.error + "), retrying in " +
                      std::to_string(delay.count()) + "ms");
            sleep_(delay);
        }
    }

    entry.failed = reply.status != BackendReply::Status::ok;
    entry.error = entry.failed ? attempt_log : std::string{};
    entry.response_text = reply.text;
    entry.prompt_tokens = reply.prompt_tokens;
    entry.completion_tokens = reply.completion_tokens;

    {
        std::lock_guard<std::mutex> lock(transcript_mutex_);
        entry.call_id = next_call_id_++;
        transcript_.push_back(entry);
        if (sink_) sink_(entry);
    }

    if (entry.failed) {
        raise(Errc::call_failed, std::string(role_tag_name(request.role_tag)) +
                                     " call failed after " + std::to_string(entry.attempt) +
                                     " attempt(s): " + attempt_log);
    }

    ChatResponse response;
    response.text = reply.text;
    response.latency_ms = entry.latency_ms;
    response.prompt_tokens = reply.prompt_tokens;
    response.completion_tokens = reply.completion_tokens;
    response.attempt = entry.attempt;
    return response;
}

std::vector<TranscriptEntry> Gateway::transcript() const {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    return transcript_;
}

std::size_t Gateway::call_count() const {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    return transcript_.size();
}

std::size_t Gateway::calls_tagged(RoleTag role) const {
    std::lock_guard<std::mutex> lock(transcript_mutex_);
    std::size_t n = 0;
    for (const auto& e : transcript_) {
        if (e.role == role) ++n;
    }
    return n;
}

} // namespace montage
