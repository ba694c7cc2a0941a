#pragma once

#include <cstdint>
#include <string>

namespace montage {

enum class RoleTag { writer, editor, director, victim, judge, entailment };

const char* role_tag_name(RoleTag tag);
RoleTag role_tag_from_name(const std::string& name);

struct ChatRequest {
    RoleTag role_tag = RoleTag::writer;
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::string model_id;
};

struct ChatResponse {
    std::string text;
    std::int64_t latency_ms = 0;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int attempt = 1;
};

// Outcome of one backend attempt. transient errors are retried by the
// gateway; fatal ones surface immediately.
struct BackendReply {
    enum class Status { ok, transient, fatal };
    Status status = Status::ok;
    std::string text;
    std::string error;
    int prompt_tokens = 0;
    int completion_tokens = 0;

    static BackendReply success(std::string text, int prompt_tokens = 0,
                                int completion_tokens = 0) {
        BackendReply r;
        r.status = Status::ok;
        r.text = std::move(text);
        r.prompt_tokens = prompt_tokens;
        r.completion_tokens = completion_tokens;
        return r;
    }
    static BackendReply transient(std::string error) {
        BackendReply r;
        r.status = Status::transient;
        r.error = std::move(error);
        return r;
    }
    static BackendReply fatal(std::string error) {
        BackendReply r;
        r.status = Status::fatal;
        r.error = std::move(error);
        return r;
    }
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

} // namespace montage
