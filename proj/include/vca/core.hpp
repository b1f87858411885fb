#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vca {

/// One multiple-choice question. Options are lettered A.. in render order.
struct McqItem {
    std::string id;
    std::string question;
    std::vector<std::string> options;
    int gold_index = 0;

    /// Throws std::invalid_argument when any invariant is broken
    /// (empty/duplicate options, bad gold index, blank question, K > 26).
    void validate() const;
    int num_options() const { return static_cast<int>(options.size()); }
};

/// The three attack surfaces of a rendered prompt.
enum class Surface { Query, SystemPrompt, Demonstration };

std::string to_string(Surface s);
Surface surface_from_string(const std::string& s);

/// System prompt + optional one-shot demonstration + rendered user query.
/// A trigger suffix, when set, is appended to the system prompt after a
/// single space.
struct PromptBundle {
    std::string system_prompt;
    std::optional<std::string> demonstration;
    std::string query;
    std::optional<std::string> trigger_suffix;

    std::string effective_system_prompt() const;
    /// Everything the model sees, concatenated in message order.
    std::string full_text() const;
};

constexpr char kNoAnswer = '\0';

/// Parsed (answer letter, confidence percent) pair from one model response.
struct Verdict {
    char answer = kNoAnswer;       // 'A'.. or kNoAnswer
    double confidence = 0.0;       // percent in [0, 100]
    std::string raw;               // original response text
    bool defaulted = false;        // extraction fell back to max entropy

    bool has_answer() const { return answer != kNoAnswer; }
};

/// Per-example attack record: what the attack saw and what it produced.
struct AttackOutcome {
    std::string item_id;
    std::string cem_name;
    std::string attack_name;
    Verdict original;
    Verdict adversarial;
    long iterations = 0;           // executed attack-loop steps
    std::string original_text;     // surface text before the attack
    std::string adversarial_text;  // surface text after the attack
    Surface surface = Surface::Query;
    bool flipped = false;          // answer changed on an accepted perturbation
};

/// Option index -> letter ('A' + index). Throws for index outside [0, 26).
char option_letter(int index);
/// Letter -> option index, or -1 when out of range for num_options.
int option_index(char letter, int num_options);

/// Fallback confidence when extraction fails: 100 / num_options.
double max_entropy_confidence(int num_options);

/// (prod v_i)^(1/n) over percents in (0, 100]. Zero values are clamped to
/// 0.01 before the product so a single 0% step cannot annihilate the
/// aggregate. Empty input throws std::invalid_argument.
double geometric_mean(const std::vector<double>& values);

}  // namespace vca
