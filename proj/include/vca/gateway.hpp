#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vca/core.hpp"

namespace vca {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 400;
    bool want_logprobs = false;
    std::optional<long> seed;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct ChatResponse {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TransportExhaustedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthenticationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedResponseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Text-in/text-out model access. Implementations must be safe for
/// concurrent complete() calls.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string name() const = 0;
    virtual bool supports_logprobs() const = 0;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

/// Wraps a client with a response cache and 3-attempt exponential backoff on
/// transient transport failures. The cache key covers model name, the full
/// message list, temperature, max_tokens, logprob flag and seed, so repeated
/// SC samples with distinct seeds are cached separately.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<ModelClient> client, bool caching = true);

    ChatResponse complete(const ChatRequest& req);

    ModelClient& client() { return *client_; }
    const ModelClient& client() const { return *client_; }

    /// Underlying client invocations (cache hits excluded).
    long total_calls() const { return total_calls_.load(); }

    void set_backoff_ms(int ms) { backoff_ms_ = ms; }

private:
    std::shared_ptr<ModelClient> client_;
    bool caching_;
    int backoff_ms_ = 250;
    std::atomic<long> total_calls_{0};
    mutable std::mutex mu_;
    std::unordered_map<std::string, ChatResponse> cache_;
};

std::string cache_key(const std::string& model_name, const ChatRequest& req);

/// Deterministic offline stand-in for the victim LLM. Scores the prompt
/// lexically:
///   - tokens: lowercase, split on non-alphanumerics, 1-char fragments and
///     the fixed stop list dropped;
///   - overlap_i = |prompt-context tokens  option-i tokens| where the
///     context is everything the model sees minus the lettered option block;
///   - answer = argmax overlap, ties to the lowest index;
///   - confidence = round-to-nearest-5 of 100*(o1+1)/(o1+o2+2) when o1 > 0,
///     else the max-entropy floor; minus 5 per distinct out-of-vocabulary
///     context token; clamped to [100/K, 100].
/// The vocabulary is every token of the dataset given at construction plus
/// the built-in prompt lexicon; purely numeric tokens are never OOV.
class MockModel final : public ModelClient {
public:
    explicit MockModel(const std::vector<McqItem>& dataset,
                       const std::vector<std::string>& extra_vocab_texts = {});

    std::string name() const override { return "mock"; }
    bool supports_logprobs() const override { return true; }
    ChatResponse complete(const ChatRequest& req) override;

    /// The lexical oracle on explicit inputs.
    Verdict mock_verdict(const McqItem& item, const std::string& query_text) const;

    /// Appendix-S style synthetic logprobs: -1.0 per in-vocabulary token,
    /// -8.0 per OOV token.
    std::vector<TokenLogprob> prompt_logprobs(const std::string& text) const;

    bool in_vocabulary(const std::string& lower_token) const;

    struct Score {
        int answer_index = 0;
        double confidence = 0.0;
        int top_overlap = 0;
        int second_overlap = 0;
        int oov_count = 0;
    };
    Score score_context(const std::vector<std::string>& context_tokens,
                        const std::vector<std::string>& options) const;

private:
    std::unordered_set<std::string> vocabulary_;
};

}  // namespace vca
