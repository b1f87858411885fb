#include "vca/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "vca/perturb.hpp"
#include "vca/prompt_text.hpp"
#include "vca/text.hpp"

namespace vca {

AttackTableRow attack_metrics(const std::vector<AttackOutcome>& outcomes,
                              const std::unordered_map<std::string, char>& gold) {
    if (outcomes.empty()) throw std::invalid_argument("attack_metrics: empty outcome list");

    AttackTableRow row;
    double cf_sum = 0.0, adv_sum = 0.0;
    long affected = 0;
    double aff_delta_sum = 0.0, aff_iter_sum = 0.0;
    long oc = 0, oc_flipped = 0, ow = 0, ow_flipped = 0;

    for (const auto& o : outcomes) {
        cf_sum += o.original.confidence;
        adv_sum += o.adversarial.confidence;
        if (o.adversarial.confidence < o.original.confidence) {
            ++affected;
            aff_delta_sum += o.original.confidence - o.adversarial.confidence;
            aff_iter_sum += static_cast<double>(o.iterations);
        }
        auto it = gold.find(o.item_id);
        if (it == gold.end()) continue;
        const bool originally_correct = o.original.answer == it->second;
        const bool changed = o.adversarial.answer != o.original.answer;
        if (originally_correct) {
            ++oc;
            if (changed) ++oc_flipped;
        } else {
            ++ow;
            if (changed) ++ow_flipped;
        }
    }

    const double n = static_cast<double>(outcomes.size());
    row.cf = cf_sum / n;
    row.adv_cf = adv_sum / n;
    row.pct_affected = 100.0 * affected / n;
    if (affected > 0) {
        row.delta_aff_cf = aff_delta_sum / affected;
        row.iters = aff_iter_sum / affected;
    }
    if (oc > 0) row.flip_oc = 100.0 * oc_flipped / static_cast<double>(oc);
    if (ow > 0) row.flip_ow = 100.0 * ow_flipped / static_cast<double>(ow);
    return row;
}

ReliabilityBins ece(const std::vector<std::pair<double, bool>>& predictions, int n_bins) {
    if (predictions.empty()) throw std::invalid_argument("ece: empty input");
    if (n_bins < 1) throw std::invalid_argument("ece: need at least one bin");

    ReliabilityBins bins;
    bins.n_bins = n_bins;
    bins.bin_confidence.assign(static_cast<size_t>(n_bins), 0.0);
    bins.bin_accuracy.assign(static_cast<size_t>(n_bins), 0.0);
    bins.bin_count.assign(static_cast<size_t>(n_bins), 0);

    for (const auto& [conf, correct] : predictions) {
        if (conf < 0.0 || conf > 1.0) {
            throw std::invalid_argument("ece: confidences must be fractions in [0, 1]");
        }
        // Bins are half-open on the left, (0, 1/n]..( (n-1)/n, 1], with 0
        // assigned to the first bin.
        int b = conf <= 0.0 ? 0 : static_cast<int>(std::ceil(conf * n_bins)) - 1;
        b = std::clamp(b, 0, n_bins - 1);
        bins.bin_confidence[static_cast<size_t>(b)] += conf;
        bins.bin_accuracy[static_cast<size_t>(b)] += correct ? 1.0 : 0.0;
        bins.bin_count[static_cast<size_t>(b)] += 1;
    }

    const double n = static_cast<double>(predictions.size());
    double e = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const size_t i = static_cast<size_t>(b);
        if (bins.bin_count[i] == 0) continue;
        bins.bin_confidence[i] /= bins.bin_count[i];
        bins.bin_accuracy[i] /= bins.bin_count[i];
        e += (bins.bin_count[i] / n) * std::abs(bins.bin_accuracy[i] - bins.bin_confidence[i]);
    }
    bins.ece = e;
    return bins;
}

double logprob_confidence(const std::vector<double>& option_max_logprobs) {
    if (option_max_logprobs.size() < 2) {
        throw std::invalid_argument("logprob_confidence: need at least 2 options");
    }
    const double m = *std::max_element(option_max_logprobs.begin(), option_max_logprobs.end());
    double denom = 0.0;
    for (double lp : option_max_logprobs) denom += std::exp(lp - m);
    double best = 0.0;
    for (double lp : option_max_logprobs) best = std::max(best, std::exp(lp - m) / denom);
    return best;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");

    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0) return std::nullopt;  // constant list
    return cov / std::sqrt(vx * vy);
}

std::vector<StabilityPoint> stability_curve(const CemSpec& cem, const McqItem& item,
                                            Gateway& gateway, long seed) {
    TrigramSimilarity scorer;
    AttackContext ctx{cem, item, gateway, scorer, nullptr};

    const std::string original = item.question;
    const auto ranked = importance_scores(ctx, Surface::Query, original, seed);
    const auto words = split_words(original);
    const double total = static_cast<double>(ranked.size());

    std::vector<StabilityPoint> curve;
    Verdict v0 = evaluate_surface(ctx, Surface::Query, original, seed);
    curve.push_back({0.0, v0.confidence, v0.answer});

    std::vector<bool> removed(words.size(), false);
    for (size_t step = 0; step < ranked.size(); ++step) {
        removed[static_cast<size_t>(ranked[step].word_index)] = true;
        std::vector<std::string> remaining;
        for (size_t i = 0; i < words.size(); ++i) {
            if (!removed[i]) remaining.push_back(words[i]);
        }
        Verdict v = evaluate_surface(ctx, Surface::Query, join_words(remaining), seed);
        curve.push_back({100.0 * static_cast<double>(step + 1) / total, v.confidence, v.answer});
    }
    return curve;
}

Verdict ms_corruption(const MsTrace& trace, const McqItem& item, MsCorruptionMode mode,
                      double fraction, unsigned long long rng_seed, Gateway& gateway) {
    if (trace.steps.empty()) throw std::invalid_argument("ms_corruption: trace has no steps");
    if (fraction < 0.0 || fraction > 1.0) {
        throw std::invalid_argument("ms_corruption: fraction must be in [0, 1]");
    }
    if (fraction == 0.0) return trace.final_verdict;

    std::mt19937_64 rng(rng_seed);
    const size_t n = trace.steps.size();
    const size_t corrupt = std::min<size_t>(
        n, static_cast<size_t>(std::llround(fraction * static_cast<double>(n))));
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<bool> chosen(n, false);
    for (size_t i = 0; i < corrupt; ++i) chosen[idx[i]] = true;

    std::uniform_int_distribution<int> draw(0, 100);
    std::string steps_text;
    for (size_t i = 0; i < n; ++i) {
        std::optional<double> conf = trace.steps[i].confidence;
        if (chosen[i]) {
            if (mode == MsCorruptionMode::Mask) {
                conf.reset();
            } else {
                conf = static_cast<double>(draw(rng));
            }
        }
        steps_text += "Step " + std::to_string(i + 1) + ": previous reasoning.";
        if (conf) {
            steps_text += " Confidence: " + std::to_string(static_cast<int>(std::llround(*conf))) + "%";
        }
        steps_text += "\n";
    }

    // Re-feed the corrupted sequence and ask for the final step again.
    CemSpec spec = CemSpec::make(CemKind::Ms);
    SurfaceOverrides overrides;
    overrides.question = item.question + "\nEarlier steps:\n" + steps_text +
                         "Restate the final answer and overall confidence.";
    return elicit(spec, item, gateway, overrides,
                  static_cast<long>(rng_seed & 0x7fffffffffffffffULL))
        .verdict;
}

const std::vector<std::string>& phrase_list() { return prompts::confidence_phrases(); }

AttackTableRow phrase_probe(const CemSpec& cem, const std::vector<McqItem>& items,
                            const std::string& phrase, Surface surface, Gateway& gateway) {
    if (!phrase.empty()) {
        const auto& known = phrase_list();
        if (std::find(known.begin(), known.end(), phrase) == known.end()) {
            throw std::invalid_argument("phrase_probe: unknown phrase: " + phrase);
        }
    }
    if (surface == Surface::Demonstration) {
        throw std::invalid_argument("phrase_probe: phrases attach to query or system prompt");
    }

    std::vector<AttackOutcome> outcomes;
    std::unordered_map<std::string, char> gold;
    double down_sum = 0.0, up_sum = 0.0;
    long down_n = 0, up_n = 0;

    for (const auto& item : items) {
        gold[item.id] = option_letter(item.gold_index);
        Verdict original = elicit(cem, item, gateway, {}, 0).verdict;

        SurfaceOverrides overrides;
        if (!phrase.empty()) {
            if (surface == Surface::Query) {
                overrides.question = item.question + " " + phrase;
            } else {
                overrides.system_prompt = cem.system_template + " " + phrase;
            }
        }
        Verdict probed = elicit(cem, item, gateway, overrides, 0).verdict;

        AttackOutcome o;
        o.item_id = item.id;
        o.cem_name = cem.name();
        o.attack_name = "phrase";
        o.original = original;
        o.adversarial = probed;
        o.iterations = phrase.empty() ? 0 : 1;
        o.original_text = surface == Surface::Query ? item.question : cem.system_template;
        o.adversarial_text = phrase.empty() ? o.original_text : o.original_text + " " + phrase;
        o.surface = surface;
        outcomes.push_back(std::move(o));

        const double delta = original.confidence - probed.confidence;
        if (delta > 0) {
            down_sum += delta;
            ++down_n;
        } else if (delta < 0) {
            up_sum += -delta;
            ++up_n;
        }
    }

    AttackTableRow row = attack_metrics(outcomes, gold);
    if (down_n > 0) row.delta_down_mean = down_sum / down_n;
    if (up_n > 0) row.delta_up_mean = up_sum / up_n;
    return row;
}

namespace {

std::string cell(const std::optional<double>& v) {
    if (!v) return "null";
    std::ostringstream out;
    out << std::round(*v * 100.0) / 100.0;
    return out.str();
}

}  // namespace

std::string render_csv(const std::vector<std::pair<std::string, AttackTableRow>>& rows) {
    std::string out =
        "label,cf,adv_cf,pct_affected,iters,delta_aff_cf,flip_oc,flip_ow,delta_down,delta_up\n";
    for (const auto& [label, r] : rows) {
        out += label + "," + cell(r.cf) + "," + cell(r.adv_cf) + "," + cell(r.pct_affected) + "," +
               cell(r.iters) + "," + cell(r.delta_aff_cf) + "," + cell(r.flip_oc) + "," +
               cell(r.flip_ow) + "," + cell(r.delta_down_mean) + "," + cell(r.delta_up_mean) +
               "\n";
    }
    return out;
}

std::string render_markdown(const std::vector<std::pair<std::string, AttackTableRow>>& rows) {
    std::string out =
        "| label | Cf. | Adv. Cf. | %Aff. | #Iters | dAff.Cf | %Flp(OC) | %Flp(OW) |\n"
        "|---|---|---|---|---|---|---|---|\n";
    for (const auto& [label, r] : rows) {
        out += "| " + label + " | " + cell(r.cf) + " | " + cell(r.adv_cf) + " | " +
               cell(r.pct_affected) + " | " + cell(r.iters) + " | " + cell(r.delta_aff_cf) +
               " | " + cell(r.flip_oc) + " | " + cell(r.flip_ow) + " |\n";
    }
    return out;
}

}  // namespace vca
