#include "vca/defense.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "vca/hash.hpp"

namespace vca {

double log_perplexity(const std::vector<double>& token_logprobs) {
    if (token_logprobs.empty()) {
        throw std::invalid_argument("log_perplexity: empty logprob list");
    }
    double sum = 0.0;
    for (double lp : token_logprobs) {
        if (!std::isfinite(lp) || lp > 0.0) {
            throw std::invalid_argument("log_perplexity: logprobs must be finite and <= 0");
        }
        sum += lp;
    }
    return -sum / static_cast<double>(token_logprobs.size());
}

double log_perplexity(const std::vector<TokenLogprob>& token_logprobs) {
    std::vector<double> values;
    values.reserve(token_logprobs.size());
    for (const auto& t : token_logprobs) values.push_back(t.logprob);
    return log_perplexity(values);
}

double calibrate_ppl_threshold(const std::vector<std::string>& benign_prompts,
                               const LogprobSource& source) {
    if (benign_prompts.empty()) {
        throw std::invalid_argument("calibrate_ppl_threshold: need at least one benign prompt");
    }
    double max_ppl = 0.0;
    bool first = true;
    for (const auto& prompt : benign_prompts) {
        double ppl = log_perplexity(source(prompt));
        if (first || ppl > max_ppl) max_ppl = ppl;
        first = false;
    }
    return max_ppl + 1e-6;
}

PerplexityVerdict evaluate_perplexity(const std::string& prompt, double threshold,
                                      const LogprobSource& source) {
    PerplexityVerdict v;
    v.log_ppl = log_perplexity(source(prompt));
    v.threshold = threshold;
    v.filtered = v.log_ppl > threshold;
    return v;
}

PromptFilter make_perplexity_filter(double threshold, LogprobSource source) {
    return [threshold, source = std::move(source)](const std::string& prompt) {
        return evaluate_perplexity(prompt, threshold, source).filtered;
    };
}

const std::string& smooth_alphabet() {
    // string.printable: digits, lowercase, uppercase, punctuation, whitespace.
    static const std::string kAlphabet =
        "0123456789"
        "abcdefghijklmnopqrstuvwxyz"
        "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
        "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
        " \t\n\r\x0b\x0c";
    return kAlphabet;
}

SmoothResult smoothllm_confidence(const CemSpec& cem, const McqItem& item, Gateway& gateway,
                                  const SmoothConfig& cfg, const SurfaceOverrides& overrides,
                                  long seed) {
    if (cfg.copies < 1) throw std::invalid_argument("smoothllm: copies must be >= 1");
    if (cfg.fraction < 0.0 || cfg.fraction > 1.0) {
        throw std::invalid_argument("smoothllm: fraction must be in [0, 1]");
    }

    // Perturb the full effective system prompt, trigger suffix included.
    std::string base_prompt = overrides.system_prompt.value_or(cem.system_template);
    if (overrides.trigger_suffix && !overrides.trigger_suffix->empty()) {
        base_prompt += " " + *overrides.trigger_suffix;
    }
    std::mt19937_64 rng(cfg.rng_seed);
    const std::string& alphabet = smooth_alphabet();

    SmoothResult result;
    for (int copy = 0; copy < cfg.copies; ++copy) {
        std::string perturbed = base_prompt;
        const size_t swaps = static_cast<size_t>(
            std::llround(cfg.fraction * static_cast<double>(perturbed.size())));
        if (swaps > 0 && !perturbed.empty()) {
            std::vector<size_t> idx(perturbed.size());
            for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::shuffle(idx.begin(), idx.end(), rng);
            std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
            for (size_t i = 0; i < swaps && i < idx.size(); ++i) {
                perturbed[idx[i]] = alphabet[pick(rng)];
            }
        }
        SurfaceOverrides copy_overrides = overrides;
        copy_overrides.system_prompt = perturbed;
        copy_overrides.trigger_suffix.reset();
        result.copies.push_back(elicit(cem, item, gateway, copy_overrides, seed).verdict);
    }

    // Aggregate exactly like the SC CEM: mode answer (ties to the earliest
    // tied copy), arithmetic-mean confidence.
    std::map<char, int> counts;
    for (const auto& v : result.copies) counts[v.answer] += 1;
    int best_count = 0;
    for (const auto& [a, n] : counts) best_count = std::max(best_count, n);
    char answer = kNoAnswer;
    for (const auto& v : result.copies) {
        if (counts[v.answer] == best_count) {
            answer = v.answer;
            break;
        }
    }
    double mean = 0.0;
    for (const auto& v : result.copies) mean += v.confidence;
    mean /= static_cast<double>(result.copies.size());

    result.verdict.answer = answer;
    result.verdict.confidence = mean;
    result.verdict.defaulted = answer == kNoAnswer;
    result.verdict.raw = result.copies.back().raw;
    return result;
}

ParaphraseResult paraphrase_defense(const std::string& system_prompt, Rephraser& rephraser) {
    ParaphraseResult out;
    if (system_prompt.empty()) {
        out.degenerate = true;
        return out;
    }
    try {
        out.text = rephraser.paraphrase(system_prompt);
    } catch (const std::exception& e) {
        throw DefenseUnavailableError(std::string("paraphrase defense unavailable: ") + e.what());
    }
    out.degenerate = out.text.empty();
    return out;
}

FilterReport filter_report(const CemSpec& cem, const std::vector<McqItem>& dataset,
                           const TriggerArtifact& trigger, const PromptFilter& filter,
                           Gateway& gateway) {
    FilterReport report;
    if (dataset.empty()) return report;

    const std::string suffix = trigger.payload_text();
    int benign_blocked = 0;
    int affected = 0;
    int affected_blocked = 0;
    double blocked_delta_sum = 0.0;

    for (const auto& item : dataset) {
        const long seed = static_cast<long>(fnv1a64(item.id) & 0x7fffffffffffffffULL);

        PromptBundle benign_bundle = build_prompt(cem, item);
        PromptBundle triggered_bundle = apply_trigger(trigger, benign_bundle);

        if (filter(benign_bundle.full_text())) ++benign_blocked;

        SurfaceOverrides with_trigger;
        with_trigger.trigger_suffix = suffix;
        const double benign_conf = elicit(cem, item, gateway, {}, seed).verdict.confidence;
        const double triggered_conf =
            elicit(cem, item, gateway, with_trigger, seed).verdict.confidence;

        if (triggered_conf < benign_conf) {
            ++affected;
            if (filter(triggered_bundle.full_text())) {
                ++affected_blocked;
                blocked_delta_sum += benign_conf - triggered_conf;
            }
        }
    }

    report.affected_count = affected;
    report.pct_misidentified =
        100.0 * benign_blocked / static_cast<double>(dataset.size());
    if (affected > 0) {
        report.pct_filtered = 100.0 * affected_blocked / static_cast<double>(affected);
    }
    if (affected_blocked > 0) {
        report.delta_conf_filtered = blocked_delta_sum / affected_blocked;
    }
    return report;
}

}  // namespace vca
