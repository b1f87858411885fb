#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/gateway.hpp"

namespace vca {

enum class CemKind { Base, Cot, Ms, Sc, SelfProbe, Likert };

std::string cem_name(CemKind kind);
CemKind cem_from_name(const std::string& name);

/// A confidence elicitation method: instruction templates, sampling
/// parameters and the aggregation rule applied in elicit().
struct CemSpec {
    CemKind kind = CemKind::Base;
    int sample_count = 3;  // SC only
    std::string system_template;
    std::optional<std::string> demonstration;
    std::string query_tail;

    double temperature() const { return kind == CemKind::Sc ? 0.7 : 0.0; }
    int max_tokens = 400;
    std::string name() const { return cem_name(kind); }

    static CemSpec make(CemKind kind);
    /// Built-in defaults with any `<cem>.system.txt` / `<cem>.demo.txt` /
    /// `<cem>.tail.txt` files found under dir applied on top.
    static CemSpec make_from_dir(CemKind kind, const std::string& dir);
};

/// Replacement texts for individual prompt surfaces, used by the attacks.
struct SurfaceOverrides {
    std::optional<std::string> question;
    std::optional<std::string> system_prompt;
    std::optional<std::string> demonstration;
    std::optional<std::string> trigger_suffix;
};

/// Deterministic prompt rendering: options lettered A.. in order, the CEM's
/// instruction tail last. Throws when the item has more than 26 options.
PromptBundle build_prompt(const CemSpec& cem, const McqItem& item,
                          const SurfaceOverrides& overrides = {});

/// Render just the user query for a question text (used when a surface
/// override replaces the question).
std::string render_query(const CemSpec& cem, const McqItem& item,
                         const std::string& question_text);

/// Extracts the final (letter, percent) mention from a model response.
/// Missing answer -> kNoAnswer; missing confidence -> max-entropy default
/// with `defaulted` set. Bare numbers <= 1 without a percent sign are read
/// as fractions and scaled to percent.
Verdict parse_verdict(const std::string& text, int num_options);

/// Canonical rendering of a verdict, the inverse of parse_verdict for
/// non-defaulted verdicts.
std::string render_verdict(const Verdict& v);

/// Last confidence mention in the text, if any (no answer letter required).
std::optional<double> parse_confidence_only(const std::string& text);

/// One reasoning step of a multi-step response.
struct MsStep {
    std::string text;
    std::optional<double> confidence;
};

struct MsTrace {
    std::vector<MsStep> steps;
    double final_raw_confidence = 0.0;  // the percent stated on the final line
    Verdict final_verdict;              // confidence = geometric mean rule
};

/// Parse a multi-step response into steps + final and apply the aggregation
/// rule: final confidence = geometric mean of the step confidences plus the
/// final stated confidence. Steps without a confidence are skipped.
MsTrace parse_ms_trace(const std::string& text, int num_options);

/// Seven percents from 100 down to the max-entropy floor, equally spaced.
std::vector<double> likert_scale(int num_options);

/// Map a response containing one of the seven certainty phrases to its
/// percent. Returns nullopt when no phrase is present.
std::optional<double> parse_likert_confidence(const std::string& text, int num_options);

struct ElicitResult {
    Verdict verdict;
    std::optional<MsTrace> ms_trace;  // MS only
    std::vector<Verdict> samples;     // SC samples, in sample-index order
};

/// Run one CEM against the gateway. SC issues sample_count calls at
/// temperature 0.7 (answer = mode, tie broken by earliest tied sample,
/// confidence = arithmetic mean); self-probing issues an answer-only call
/// followed by a confidence-given-answer call.
ElicitResult elicit(const CemSpec& cem, const McqItem& item, Gateway& gateway,
                    const SurfaceOverrides& overrides = {}, long seed = 0);

}  // namespace vca
