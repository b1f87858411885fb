#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"
#include "vca/trigger.hpp"

namespace vca {

struct PerplexityVerdict {
    double log_ppl = 0.0;
    double threshold = 0.0;
    bool filtered = false;  // log_ppl > threshold
};

struct SmoothConfig {
    int copies = 5;       // delta
    double fraction = 0.1;  // q, share of characters swapped per copy
    unsigned long long rng_seed = 0;
};

/// -mean(logprobs). Logprobs must be finite and <= 0; empty input throws.
double log_perplexity(const std::vector<double>& token_logprobs);
double log_perplexity(const std::vector<TokenLogprob>& token_logprobs);

/// Text -> per-token logprobs. Backed by a real model in echo mode or the
/// mock's synthetic rule.
using LogprobSource = std::function<std::vector<TokenLogprob>(const std::string&)>;

/// max benign log-perplexity + 1e-6: zero false positives on the
/// calibration set by construction.
double calibrate_ppl_threshold(const std::vector<std::string>& benign_prompts,
                               const LogprobSource& source);

/// Generic prompt-filter contract: true = the prompt is blocked.
using PromptFilter = std::function<bool(const std::string&)>;

PromptFilter make_perplexity_filter(double threshold, LogprobSource source);

/// Score one prompt against a calibrated threshold.
PerplexityVerdict evaluate_perplexity(const std::string& prompt, double threshold,
                                      const LogprobSource& source);

struct SmoothResult {
    Verdict verdict;                // answer = mode, confidence = mean
    std::vector<Verdict> copies;    // per-copy verdicts in copy order
};

/// SmoothLLM adapted to confidence attacks: delta copies of the system
/// prompt, each with fraction*len characters swapped for uniform draws from
/// the 100-character printable alphabet, elicited and aggregated.
SmoothResult smoothllm_confidence(const CemSpec& cem, const McqItem& item, Gateway& gateway,
                                  const SmoothConfig& cfg,
                                  const SurfaceOverrides& overrides = {}, long seed = 0);

/// The 100-character alphabet (printable ASCII incl. whitespace).
const std::string& smooth_alphabet();

struct ParaphraseResult {
    std::string text;
    bool degenerate = false;  // empty input or empty rephraser output
};

struct DefenseUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rephrase a system prompt through the fixed paraphrase instruction.
/// Rephraser failure -> DefenseUnavailableError (caller proceeds undefended).
ParaphraseResult paraphrase_defense(const std::string& system_prompt, Rephraser& rephraser);

struct FilterReport {
    double pct_filtered = 0.0;          // share of trigger-affected prompts blocked
    double delta_conf_filtered = 0.0;   // mean (benign - triggered) conf on blocked ones
    double pct_misidentified = 0.0;     // %MI: share of benign prompts blocked
    int affected_count = 0;
};

/// Run a prompt filter against a dataset with and without a trigger:
/// %filtered among trigger-affected examples, the confidence drop on the
/// filtered ones, and %MI on benign prompts.
FilterReport filter_report(const CemSpec& cem, const std::vector<McqItem>& dataset,
                           const TriggerArtifact& trigger, const PromptFilter& filter,
                           Gateway& gateway);

}  // namespace vca
