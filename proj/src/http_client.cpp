#include "vca/http_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace vca {

namespace {

using nlohmann::json;

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw std::invalid_argument("endpoint must include a scheme: " + endpoint);
    }
    const size_t path = endpoint.find('/', scheme + 3);
    if (path == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path), prefix};
}

}  // namespace

HttpChatClient::HttpChatClient(std::string model_name, std::string endpoint,
                               std::string api_key_env)
    : model_name_(std::move(model_name)) {
    auto [base, prefix] = split_endpoint(endpoint);
    base_url_ = std::move(base);
    path_prefix_ = std::move(prefix);
    if (!api_key_env.empty()) {
        if (const char* key = std::getenv(api_key_env.c_str())) api_key_ = key;
    }
}

std::string HttpChatClient::build_body(const std::string& model_name, const ChatRequest& req) {
    json body;
    body["model"] = model_name;
    json messages = json::array();
    for (const auto& m : req.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = messages;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.want_logprobs) body["logprobs"] = true;
    if (req.seed) body["seed"] = *req.seed;
    return body.dump();
}

ChatResponse HttpChatClient::parse_body(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    ChatResponse resp;
    try {
        const json& choice = j.at("choices").at(0);
        resp.text = choice.at("message").at("content").get<std::string>();
        if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
            std::vector<TokenLogprob> lps;
            const json& lp = choice["logprobs"];
            if (lp.contains("content")) {
                for (const auto& t : lp["content"]) {
                    lps.push_back({t.value("token", std::string()), t.value("logprob", 0.0)});
                }
            }
            if (!lps.empty()) resp.token_logprobs = std::move(lps);
        }
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("unexpected response shape: ") + e.what());
    }
    return resp;
}

ChatResponse HttpChatClient::complete(const ChatRequest& req) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                              build_body(model_name_, req), "application/json");
    if (!result) {
        throw TransportError("connection failed: " + httplib::to_string(result.error()));
    }
    if (result->status == 401 || result->status == 403) {
        throw AuthenticationError("authentication failed (HTTP " +
                                  std::to_string(result->status) + ")");
    }
    if (result->status == 429 || result->status >= 500) {
        throw TransportError("transient HTTP " + std::to_string(result->status));
    }
    if (result->status != 200) {
        throw MalformedResponseError("HTTP " + std::to_string(result->status) + ": " +
                                     result->body.substr(0, 200));
    }
    return parse_body(result->body);
}

}  // namespace vca
