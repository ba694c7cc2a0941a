#include "montage/llm/remote.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "montage/util/errors.hpp"
#include "montage/util/logging.hpp"

namespace montage {

RemoteBackend::RemoteBackend(RemoteEndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        raise(Errc::invalid_config, "remote backend needs a base_url");
    }
    if (config_.default_model.empty()) {
        raise(Errc::invalid_config, "remote backend needs a default_model");
    }
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        api_key_ = key;
    } else {
        log::warn("env " + config_.api_key_env +
                  " not set; remote calls go out without an Authorization header");
    }
}

BackendReply RemoteBackend::complete(const ChatRequest& request) {
    nlohmann::json body{
        {"model", request.model_id.empty() ? config_.default_model : request.model_id},
        {"messages",
         {{{"role", "system"}, {"content", request.system_prompt}},
          {{"role", "user"}, {"content", request.user_prompt}}}},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.connect_timeout_s, 0);
    client.set_read_timeout(config_.read_timeout_s, 0);
    client.set_follow_location(true);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        return BackendReply::transient("transport error: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        return BackendReply::transient("HTTP " + std::to_string(res->status) + ": " +
                                       res->body.substr(0, 200));
    }
    if (res->status < 200 || res->status >= 300) {
        return BackendReply::fatal("HTTP " + std::to_string(res->status) + ": " +
                                   res->body.substr(0, 200));
    }

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        return BackendReply::fatal(std::string("unparseable completion body: ") + e.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        return BackendReply::fatal("completion body has no choices");
    }
    const auto& choice = reply["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) {
        return BackendReply::fatal("completion choice has no message content");
    }
    std::string text = choice["message"]["content"].is_null()
                           ? std::string{}
                           : choice["message"]["content"].get<std::string>();

    int prompt_tokens = 0;
    int completion_tokens = 0;
    if (reply.contains("usage") && reply["usage"].is_object()) {
        prompt_tokens = reply["usage"].value("prompt_tokens", 0);
        completion_tokens = reply["usage"].value("completion_tokens", 0);
    }
    return BackendReply::success(std::move(text), prompt_tokens, completion_tokens);
}

} // namespace montage
