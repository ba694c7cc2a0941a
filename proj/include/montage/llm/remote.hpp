#pragma once

#include <string>

#include "montage/llm/backend.hpp"

namespace montage {

struct RemoteEndpointConfig {
    std::string base_url;         // e.g. "https://api.example.com" or "http://localhost:8000"
    std::string default_model;
    std::string api_key_env = "MONTAGE_API_KEY";
    int connect_timeout_s = 10;
    int read_timeout_s = 120;
};

// OpenAI-compatible chat-completion client (POST {base}/v1/chat/completions).
// 429 and 5xx map to transient replies so the gateway's backoff applies;
// other 4xx are fatal.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(RemoteEndpointConfig config);

    BackendReply complete(const ChatRequest& request) override;
    std::string name() const override { return "remote:" + config_.base_url; }

private:
    RemoteEndpointConfig config_;
    std::string api_key_;
};

} // namespace montage
