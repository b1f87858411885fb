#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"

namespace vca {

/// One row of the attack-effectiveness table. Metrics with an empty
/// denominator are null, never zero.
struct AttackTableRow {
    std::optional<double> cf;            // mean original confidence
    std::optional<double> adv_cf;        // mean adversarial confidence
    std::optional<double> pct_affected;  // share with adv < orig, in percent
    std::optional<double> iters;         // mean iterations over affected examples
    std::optional<double> delta_aff_cf;  // mean (orig - adv) over affected
    std::optional<double> flip_oc;       // answer-change rate, originally correct
    std::optional<double> flip_ow;       // answer-change rate, originally wrong
    // Phrase-probe extension: mean confidence delta split by direction.
    std::optional<double> delta_down_mean;
    std::optional<double> delta_up_mean;
};

/// Gold answers keyed by item id (option letters).
AttackTableRow attack_metrics(const std::vector<AttackOutcome>& outcomes,
                              const std::unordered_map<std::string, char>& gold);

struct ReliabilityBins {
    int n_bins = 10;
    std::vector<double> bin_confidence;  // mean confidence per bin
    std::vector<double> bin_accuracy;    // accuracy per bin
    std::vector<int> bin_count;
    double ece = 0.0;
};

/// Expected calibration error over equal-width bins (0,0.1]..(0.9,1.0];
/// zero confidence lands in the first bin. Confidences are fractions.
ReliabilityBins ece(const std::vector<std::pair<double, bool>>& predictions, int n_bins = 10);

/// Softmax over per-option maximal logprobs; returns the maximum softmax
/// value (the logprob-based confidence of the predicted option).
double logprob_confidence(const std::vector<double>& option_max_logprobs);

/// Rank correlation with average ranks for ties. Null for constant lists.
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct StabilityPoint {
    double percent_removed = 0.0;
    double confidence = 0.0;
    char answer = kNoAnswer;
};

/// Remove query tokens one at a time in descending importance order,
/// recording confidence and answer after each removal. Point 0 is the
/// unmodified query; the curve has (non-stop token count + 1) points.
std::vector<StabilityPoint> stability_curve(const CemSpec& cem, const McqItem& item,
                                            Gateway& gateway, long seed = 0);

enum class MsCorruptionMode { Mask, Randomize };

/// Corrupt `fraction` of the step confidences of a multi-step trace (mask
/// removes the confidence text, randomize redraws it uniformly in [0, 100]),
/// re-feed the corrupted steps and return the re-elicited final verdict.
Verdict ms_corruption(const MsTrace& trace, const McqItem& item, MsCorruptionMode mode,
                      double fraction, unsigned long long rng_seed, Gateway& gateway);

/// Append one of the twelve confidence phrases (empty = control) to the
/// query or system prompt for every item, re-elicit, and tabulate.
AttackTableRow phrase_probe(const CemSpec& cem, const std::vector<McqItem>& items,
                            const std::string& phrase, Surface surface, Gateway& gateway);

const std::vector<std::string>& phrase_list();  // the fixed 12 phrases

/// CSV with one row per (dataset, cem, attack) plus a markdown twin of the
/// paper-style attack table.
std::string render_csv(const std::vector<std::pair<std::string, AttackTableRow>>& rows);
std::string render_markdown(const std::vector<std::pair<std::string, AttackTableRow>>& rows);

}  // namespace vca
