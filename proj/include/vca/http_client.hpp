#pragma once

#include <string>

#include "vca/gateway.hpp"

namespace vca {

/// Chat-completions wire client. POSTs {endpoint}/chat/completions with the
/// standard body shape; the bearer token is read from the environment
/// variable named at construction (never a flag value).
class HttpChatClient final : public ModelClient {
public:
    HttpChatClient(std::string model_name, std::string endpoint, std::string api_key_env);

    std::string name() const override { return model_name_; }
    bool supports_logprobs() const override { return true; }
    ChatResponse complete(const ChatRequest& req) override;

    static std::string build_body(const std::string& model_name, const ChatRequest& req);
    static ChatResponse parse_body(const std::string& body);

private:
    std::string model_name_;
    std::string base_url_;   // scheme://host[:port]
    std::string path_prefix_;
    std::string api_key_;
};

}  // namespace vca
