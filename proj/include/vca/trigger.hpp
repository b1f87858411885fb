#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"
#include "vca/synonym.hpp"

namespace vca {

struct GaConfig {
    int prompts = 20;            // alpha
    int tokens_per_prompt = 20;  // beta
    int generations = 20;        // G
    int initial_samples = 200;   // S
    int iter_samples = 12;       // xi
    int elites = 4;              // E
    int tournament_k = 2;
    double mutation_rate = 0.2;
    std::vector<CemKind> cem_set = {CemKind::Base, CemKind::Cot, CemKind::Ms, CemKind::Sc};
    std::vector<std::string> word_pool;
    unsigned long long rng_seed = 0;
    /// Score prompts on one evaluation set sampled once per CEM and reused
    /// every generation (variance-free; off keeps the per-generation
    /// resampling of the original procedure).
    bool frozen_eval = false;

    void validate() const;
};

struct TriggerArtifact {
    enum class Kind { Tokens, Sentence };
    Kind kind = Kind::Tokens;
    std::vector<std::string> tokens;  // Tokens kind, size == beta
    std::string sentence;             // Sentence kind
    double loss = 0.0;                // mean confidence delta vs baseline; negative = drop
    std::string config_json;
    std::vector<double> best_loss_per_generation;

    std::string payload_text() const;
    std::string to_json() const;
    static TriggerArtifact from_json(const std::string& text);
    static TriggerArtifact load(const std::string& path);
    void save(const std::string& path) const;
};

/// Momentum-averaged word scores for the AutoDAN variant. Excluded words
/// (stop words, punctuation-bearing tokens, detected proper nouns) are never
/// inserted.
class WordScoreTable {
public:
    /// Fold one generation of (prompt, loss) observations: new words enter
    /// with the mean loss of the prompts containing them; existing words are
    /// updated to (old + new) / 2 per observation, in prompt order.
    void update(const std::vector<std::pair<std::string, double>>& prompt_losses);

    std::optional<double> score(const std::string& word) const;
    const std::map<std::string, double>& scores() const { return scores_; }
    static bool excluded(const std::string& raw_word, bool sentence_initial);

private:
    std::map<std::string, double> scores_;
};

/// Single-point crossover. v in [0, beta-2]; children keep length beta.
std::pair<std::vector<std::string>, std::vector<std::string>> crossover(
    const std::vector<std::string>& p1, const std::vector<std::string>& p2, int split);

/// Uniform random mutation: copy one randomly chosen parent, then replace
/// ceil(rate * beta) distinct indices with random pool words.
std::vector<std::string> mutate(const std::vector<std::string>& p1,
                                const std::vector<std::string>& p2, double rate,
                                const std::vector<std::string>& pool, std::mt19937_64& rng);

/// Top-k tournament: k distinct members uniformly, lowest loss wins, ties to
/// the first sampled.
size_t tournament_select(const std::vector<double>& losses, int k, std::mt19937_64& rng);

/// ConfidenceTriggers: black-box GA over token-sequence triggers appended to
/// the system prompt.
TriggerArtifact optimize_triggers(const GaConfig& cfg, const std::vector<McqItem>& train,
                                  Gateway& gateway,
                                  const std::function<void(int, double)>& on_generation = {});

/// Sentence-level rephrasing backend for the AutoDAN variant and the
/// paraphrase defense.
class Rephraser {
public:
    virtual ~Rephraser() = default;
    virtual std::vector<std::string> initial_prompts(int count) = 0;
    virtual std::string combine(const std::string& a, const std::string& b) = 0;
    virtual std::string revise(const std::string& p) = 0;
    virtual std::string paraphrase(const std::string& text) = 0;
};

/// Deterministic offline stub: combine = first 60% of a's tokens + last 40%
/// of b's; revise swaps two tokens; paraphrase rotates word order.
class StubRephraser final : public Rephraser {
public:
    explicit StubRephraser(std::vector<std::string> seed_sentences = {});
    std::vector<std::string> initial_prompts(int count) override;
    std::string combine(const std::string& a, const std::string& b) override;
    std::string revise(const std::string& p) override;
    std::string paraphrase(const std::string& text) override;

private:
    std::vector<std::string> seeds_;
};

/// LLM-backed rephraser reusing the gateway wire format.
class LlmRephraser final : public Rephraser {
public:
    explicit LlmRephraser(Gateway& gateway);
    std::vector<std::string> initial_prompts(int count) override;
    std::string combine(const std::string& a, const std::string& b) override;
    std::string revise(const std::string& p) override;
    std::string paraphrase(const std::string& text) override;

private:
    Gateway* gateway_;
};

/// ConfidenceTriggers-AutoDAN: hierarchical GA over natural-language trigger
/// sentences (momentum word scores + synonym replacement at the sentence
/// level, rephraser-backed crossover/mutation at the paragraph level).
TriggerArtifact optimize_autodan(const GaConfig& cfg, const std::vector<McqItem>& train,
                                 Gateway& gateway, Rephraser& rephraser,
                                 const SynonymProvider& synonyms,
                                 const std::function<void(int, double)>& on_generation = {});

/// Set the trigger as the bundle's system-prompt suffix (token kind joins
/// with single spaces). Applying twice replaces, never stacks.
PromptBundle apply_trigger(const TriggerArtifact& trigger, PromptBundle bundle);

/// Built-in uncertainty-flavoured word pool (~500 words); a file with one
/// word per line extends or replaces it.
std::vector<std::string> builtin_word_pool();
std::vector<std::string> load_word_pool(const std::string& path);

/// |Z|*S + G*xi*|Z|*alpha + alpha*|Z|*S.
long ga_call_budget(int cems, int initial_samples, int generations, int iter_samples,
                    int prompts);

}  // namespace vca
