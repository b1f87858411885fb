#pragma once

// Shared fakes and fixtures for the test suites.

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/gateway.hpp"
#include "vca/harness.hpp"

namespace vca::testing {

inline std::string data_path(const std::string& name) {
    return std::string(VCA_TEST_DATA_DIR) + "/" + name;
}

/// Returns canned responses in order, or via a responder function.
class ScriptedClient final : public ModelClient {
public:
    explicit ScriptedClient(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    explicit ScriptedClient(std::function<std::string(const ChatRequest&)> responder)
        : responder_(std::move(responder)) {}

    std::string name() const override { return "scripted"; }
    bool supports_logprobs() const override { return false; }
    ChatResponse complete(const ChatRequest& req) override {
        ChatResponse resp;
        if (responder_) {
            resp.text = responder_(req);
        } else {
            size_t i = next_.fetch_add(1);
            resp.text = responses_.at(i % responses_.size());
        }
        return resp;
    }

private:
    std::vector<std::string> responses_;
    std::function<std::string(const ChatRequest&)> responder_;
    std::atomic<size_t> next_{0};
};

/// Forwards to an inner client, counting calls.
class CountingClient final : public ModelClient {
public:
    explicit CountingClient(std::shared_ptr<ModelClient> inner) : inner_(std::move(inner)) {}
    std::string name() const override { return inner_->name(); }
    bool supports_logprobs() const override { return inner_->supports_logprobs(); }
    ChatResponse complete(const ChatRequest& req) override {
        calls.fetch_add(1);
        return inner_->complete(req);
    }
    std::atomic<long> calls{0};

private:
    std::shared_ptr<ModelClient> inner_;
};

/// Throws TransportError for the first `failures` calls, then succeeds.
class FlakyClient final : public ModelClient {
public:
    FlakyClient(int failures, std::string text) : failures_(failures), text_(std::move(text)) {}
    std::string name() const override { return "flaky"; }
    bool supports_logprobs() const override { return false; }
    ChatResponse complete(const ChatRequest&) override {
        if (attempts_.fetch_add(1) < failures_) throw TransportError("synthetic outage");
        return {text_, std::nullopt};
    }

private:
    int failures_;
    std::string text_;
    std::atomic<int> attempts_{0};
};

/// The worked fixture from the mock-model description: query tokens
/// {red, apple, fruit}; options A={apple,fruit}, B={car}, C={sky}, D={dog}.
inline McqItem fruit_item() {
    McqItem item;
    item.id = "fruit";
    item.question = "red apple fruit";
    item.options = {"apple fruit", "car", "sky", "dog"};
    item.gold_index = 0;
    return item;
}

inline std::vector<McqItem> fruit_dataset() { return {fruit_item()}; }

}  // namespace vca::testing
