#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vca/analysis.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"

#include "support.hpp"

using namespace vca;
using namespace vca::testing;

namespace {

AttackOutcome make_outcome(const std::string& id, char orig_a, double orig_c, char adv_a,
                           double adv_c, long iters = 1) {
    AttackOutcome o;
    o.item_id = id;
    o.original.answer = orig_a;
    o.original.confidence = orig_c;
    o.adversarial.answer = adv_a;
    o.adversarial.confidence = adv_c;
    o.iterations = iters;
    return o;
}

// Single-pass reference recomputation, kept deliberately naive.
AttackTableRow brute_force_metrics(const std::vector<AttackOutcome>& outcomes,
                                   const std::unordered_map<std::string, char>& gold) {
    AttackTableRow row;
    std::vector<double> cf, adv, deltas, iters;
    int oc = 0, ocf = 0, ow = 0, owf = 0;
    for (const auto& o : outcomes) {
        cf.push_back(o.original.confidence);
        adv.push_back(o.adversarial.confidence);
        if (o.adversarial.confidence < o.original.confidence) {
            deltas.push_back(o.original.confidence - o.adversarial.confidence);
            iters.push_back(static_cast<double>(o.iterations));
        }
        if (gold.count(o.item_id)) {
            bool correct = o.original.answer == gold.at(o.item_id);
            bool changed = o.adversarial.answer != o.original.answer;
            (correct ? oc : ow) += 1;
            if (changed) (correct ? ocf : owf) += 1;
        }
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    row.cf = mean(cf);
    row.adv_cf = mean(adv);
    row.pct_affected = 100.0 * static_cast<double>(deltas.size()) / static_cast<double>(cf.size());
    if (!deltas.empty()) {
        row.delta_aff_cf = mean(deltas);
        row.iters = mean(iters);
    }
    if (oc) row.flip_oc = 100.0 * ocf / oc;
    if (ow) row.flip_ow = 100.0 * owf / ow;
    return row;
}

double brute_force_ece(const std::vector<std::pair<double, bool>>& preds, int n_bins) {
    double total = 0.0;
    const double n = static_cast<double>(preds.size());
    for (int b = 0; b < n_bins; ++b) {
        const double lo = static_cast<double>(b) / n_bins;
        const double hi = static_cast<double>(b + 1) / n_bins;
        double conf_sum = 0.0, acc_sum = 0.0;
        int count = 0;
        for (const auto& [conf, correct] : preds) {
            const bool in_bin = b == 0 ? conf <= hi : (conf > lo && conf <= hi);
            if (!in_bin) continue;
            conf_sum += conf;
            acc_sum += correct ? 1.0 : 0.0;
            ++count;
        }
        if (count) total += (count / n) * std::abs(acc_sum / count - conf_sum / count);
    }
    return total;
}

}  // namespace

TEST_CASE("attack_metrics") {
    std::unordered_map<std::string, char> gold = {{"x", 'A'}, {"y", 'A'}};

    SUBCASE("worked two-item example") {
        // (90 -> 70, flipped, originally correct) and (80 -> 80, originally wrong)
        std::vector<AttackOutcome> outcomes = {
            make_outcome("x", 'A', 90.0, 'B', 70.0, 3),
            make_outcome("y", 'B', 80.0, 'B', 80.0, 0),
        };
        AttackTableRow row = attack_metrics(outcomes, gold);
        CHECK(*row.cf == doctest::Approx(85.0));
        CHECK(*row.adv_cf == doctest::Approx(75.0));
        CHECK(*row.pct_affected == doctest::Approx(50.0));
        CHECK(*row.delta_aff_cf == doctest::Approx(20.0));
        CHECK(*row.flip_oc == doctest::Approx(100.0));
        CHECK(*row.flip_ow == doctest::Approx(0.0));
    }
    SUBCASE("all outcomes unchanged: zero affected, null delta") {
        std::vector<AttackOutcome> outcomes = {
            make_outcome("x", 'A', 90.0, 'A', 90.0, 0),
            make_outcome("y", 'B', 80.0, 'B', 80.0, 0),
        };
        AttackTableRow row = attack_metrics(outcomes, gold);
        CHECK(*row.pct_affected == doctest::Approx(0.0));
        CHECK_FALSE(row.delta_aff_cf.has_value());
        CHECK_FALSE(row.iters.has_value());
    }
    SUBCASE("no originally-correct items: %Flp(OC) is null, never 0") {
        std::vector<AttackOutcome> outcomes = {make_outcome("x", 'B', 90.0, 'C', 70.0)};
        AttackTableRow row = attack_metrics(outcomes, gold);
        CHECK_FALSE(row.flip_oc.has_value());
        CHECK(row.flip_ow.has_value());
    }
    SUBCASE("invariant under permutation") {
        std::vector<AttackOutcome> outcomes = {
            make_outcome("x", 'A', 90.0, 'B', 70.0, 3),
            make_outcome("y", 'B', 80.0, 'B', 75.0, 2),
        };
        AttackTableRow a = attack_metrics(outcomes, gold);
        std::reverse(outcomes.begin(), outcomes.end());
        AttackTableRow b = attack_metrics(outcomes, gold);
        CHECK(*a.cf == doctest::Approx(*b.cf));
        CHECK(*a.delta_aff_cf == doctest::Approx(*b.delta_aff_cf));
        CHECK(*a.pct_affected == doctest::Approx(*b.pct_affected));
    }
    SUBCASE("matches the brute-force oracle on random fixtures") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<AttackOutcome> outcomes;
            std::unordered_map<std::string, char> g;
            const int n = 1 + static_cast<int>(rng() % 20);
            for (int i = 0; i < n; ++i) {
                std::string id = "i" + std::to_string(i);
                char oa = static_cast<char>('A' + rng() % 4);
                char aa = static_cast<char>('A' + rng() % 4);
                double oc = static_cast<double>(rng() % 101);
                double ac = static_cast<double>(rng() % 101);
                outcomes.push_back(make_outcome(id, oa, oc, aa, ac,
                                                static_cast<long>(rng() % 30)));
                g[id] = static_cast<char>('A' + rng() % 4);
            }
            AttackTableRow fast = attack_metrics(outcomes, g);
            AttackTableRow slow = brute_force_metrics(outcomes, g);
            CHECK(*fast.cf == doctest::Approx(*slow.cf).epsilon(1e-9));
            CHECK(*fast.adv_cf == doctest::Approx(*slow.adv_cf).epsilon(1e-9));
            CHECK(*fast.pct_affected == doctest::Approx(*slow.pct_affected).epsilon(1e-9));
            CHECK(fast.delta_aff_cf.has_value() == slow.delta_aff_cf.has_value());
            if (fast.delta_aff_cf) {
                CHECK(*fast.delta_aff_cf == doctest::Approx(*slow.delta_aff_cf).epsilon(1e-9));
                CHECK(*fast.iters == doctest::Approx(*slow.iters).epsilon(1e-9));
            }
            CHECK(fast.flip_oc.has_value() == slow.flip_oc.has_value());
            if (fast.flip_oc) CHECK(*fast.flip_oc == doctest::Approx(*slow.flip_oc).epsilon(1e-9));
            if (fast.flip_ow) CHECK(*fast.flip_ow == doctest::Approx(*slow.flip_ow).epsilon(1e-9));
        }
    }
    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(attack_metrics({}, gold), std::invalid_argument);
    }
}

TEST_CASE("ece") {
    SUBCASE("worked example: 0.45") {
        std::vector<std::pair<double, bool>> preds = {{0.95, true}, {0.95, false}, {0.55, true}};
        CHECK(ece(preds).ece == doctest::Approx(0.45).epsilon(1e-12));
    }
    SUBCASE("perfect high-confidence predictions score zero") {
        std::vector<std::pair<double, bool>> preds(10, {1.0, true});
        CHECK(ece(preds).ece == doctest::Approx(0.0));
    }
    SUBCASE("zero confidence lands in the first bin") {
        std::vector<std::pair<double, bool>> preds = {{0.0, false}};
        auto bins = ece(preds);
        CHECK(bins.bin_count[0] == 1);
        CHECK(bins.ece == doctest::Approx(0.0));
    }
    SUBCASE("matches the brute-force binning oracle to 1e-12") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::pair<double, bool>> preds;
            const int n = 1 + static_cast<int>(rng() % 1000);
            for (int i = 0; i < n; ++i) preds.emplace_back(unit(rng), rng() % 2 == 0);
            CHECK(ece(preds).ece == doctest::Approx(brute_force_ece(preds, 10)).epsilon(1e-12));
        }
    }
    SUBCASE("bin counts sum to the sample count") {
        std::vector<std::pair<double, bool>> preds = {
            {0.05, true}, {0.15, false}, {0.55, true}, {0.95, true}, {1.0, false}};
        auto bins = ece(preds);
        int total = 0;
        for (int c : bins.bin_count) total += c;
        CHECK(total == 5);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ece({}), std::invalid_argument);
        CHECK_THROWS_AS(ece({{1.5, true}}), std::invalid_argument);
    }
}

TEST_CASE("logprob_confidence") {
    SUBCASE("softmax of [-1,-2,-3,-4] peaks at 0.6439") {
        const double v = logprob_confidence({-1, -2, -3, -4});
        const double want =
            std::exp(-1.0) / (std::exp(-1.0) + std::exp(-2.0) + std::exp(-3.0) + std::exp(-4.0));
        CHECK(v == doctest::Approx(want).epsilon(1e-12));
        CHECK(v == doctest::Approx(0.6439).epsilon(1e-3));
    }
    SUBCASE("all equal gives 1/K") {
        CHECK(logprob_confidence({-2, -2, -2, -2}) == doctest::Approx(0.25));
    }
    SUBCASE("dominant option approaches 1") {
        CHECK(logprob_confidence({0.0, -1e9, -1e9}) == doctest::Approx(1.0));
    }
    SUBCASE("softmax normalizes") {
        std::vector<double> lps = {-0.3, -1.7, -4.2};
        const double m = *std::max_element(lps.begin(), lps.end());
        double denom = 0;
        for (double lp : lps) denom += std::exp(lp - m);
        double total = 0;
        for (double lp : lps) total += std::exp(lp - m) / denom;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("fewer than two options is an error") {
        CHECK_THROWS_AS(logprob_confidence({-1.0}), std::invalid_argument);
    }
}

TEST_CASE("spearman") {
    SUBCASE("identical lists correlate perfectly") {
        CHECK(*spearman({1, 2, 3, 5}, {1, 2, 3, 5}) == doctest::Approx(1.0));
    }
    SUBCASE("reversed ranks correlate at -1") {
        CHECK(*spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    }
    SUBCASE("worked example 0.8") {
        CHECK(*spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
    }
    SUBCASE("ties use average ranks") {
        CHECK(*spearman({1, 1, 2}, {1, 2, 3}) == doctest::Approx(1.5 / std::sqrt(3.0)));
    }
    SUBCASE("constant list is undefined") {
        CHECK_FALSE(spearman({2, 2, 2}, {1, 2, 3}).has_value());
    }
    SUBCASE("monotone transforms preserve the extremes") {
        std::vector<double> xs = {0.3, 1.7, 2.2, 9.5, 12.0};
        std::vector<double> squared, reversed;
        for (double x : xs) squared.push_back(x * x);
        reversed.assign(xs.rbegin(), xs.rend());
        CHECK(*spearman(xs, squared) == doctest::Approx(1.0));
        CHECK(*spearman(xs, reversed) == doctest::Approx(-1.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(spearman({1}, {1}), std::invalid_argument);
        CHECK_THROWS_AS(spearman({1, 2}, {1}), std::invalid_argument);
    }
}

TEST_CASE("stability_curve on the mock model") {
    McqItem item;
    item.id = "curve";
    item.question = "the copper kettle and the walnut shelf rest beside a window ledge";
    item.options = {"copper walnut", "iron pipe", "stone sill", "paper boat"};
    item.gold_index = 0;
    auto mock = std::make_shared<MockModel>(std::vector<McqItem>{item});
    Gateway gw(mock);
    CemSpec cem = CemSpec::make(CemKind::Base);
    cem.demonstration.reset();

    auto curve = stability_curve(cem, item, gw, 5);

    SUBCASE("zero-removal point equals plain elicitation") {
        auto plain = elicit(cem, item, gw, {}, 5).verdict;
        CHECK(curve.front().percent_removed == doctest::Approx(0.0));
        CHECK(curve.front().confidence == doctest::Approx(plain.confidence));
        CHECK(curve.front().answer == plain.answer);
    }
    SUBCASE("curve length is non-stop token count + 1") {
        int non_stop = 0;
        for (const auto& w : split_words(item.question)) {
            const std::string core = word_core(w);
            if (!core.empty() && !is_stop_word(core)) ++non_stop;
        }
        CHECK(curve.size() == static_cast<size_t>(non_stop) + 1);
        CHECK(curve.back().percent_removed == doctest::Approx(100.0));
    }
    SUBCASE("confidence plateaus at the floor once option tokens are gone") {
        // Importance order removes copper and walnut first: 75 -> 65 -> 25.
        CHECK(curve[0].confidence == doctest::Approx(75.0));
        CHECK(curve[1].confidence == doctest::Approx(65.0));
        for (size_t i = 2; i < curve.size(); ++i) {
            CHECK(curve[i].confidence == doctest::Approx(25.0));
        }
    }
}

TEST_CASE("ms_corruption") {
    auto items = fruit_dataset();
    auto mock = std::make_shared<MockModel>(items);
    Gateway gw(mock);
    McqItem item = fruit_item();
    CemSpec ms = CemSpec::make(CemKind::Ms);
    auto res = elicit(ms, item, gw, {}, 2);
    REQUIRE(res.ms_trace.has_value());
    REQUIRE_FALSE(res.ms_trace->steps.empty());

    SUBCASE("fraction 0 returns the original final verdict") {
        Verdict v = ms_corruption(*res.ms_trace, item, MsCorruptionMode::Mask, 0.0, 9, gw);
        CHECK(v.answer == res.verdict.answer);
        CHECK(v.confidence == doctest::Approx(res.verdict.confidence));
    }
    SUBCASE("mask and randomize produce bounded, deterministic verdicts") {
        for (auto mode : {MsCorruptionMode::Mask, MsCorruptionMode::Randomize}) {
            Verdict a = ms_corruption(*res.ms_trace, item, mode, 0.5, 9, gw);
            Verdict b = ms_corruption(*res.ms_trace, item, mode, 0.5, 9, gw);
            CHECK(a.confidence == doctest::Approx(b.confidence));
            CHECK(a.confidence >= max_entropy_confidence(item.num_options()) - 1e-9);
            CHECK(a.confidence <= 100.0 + 1e-9);
        }
    }
    SUBCASE("invalid fraction and empty trace are errors") {
        CHECK_THROWS_AS(ms_corruption(*res.ms_trace, item, MsCorruptionMode::Mask, 1.5, 9, gw),
                        std::invalid_argument);
        MsTrace empty;
        CHECK_THROWS_AS(ms_corruption(empty, item, MsCorruptionMode::Mask, 0.5, 9, gw),
                        std::invalid_argument);
    }
}

TEST_CASE("phrase_probe") {
    auto items = fruit_dataset();
    auto mock = std::make_shared<MockModel>(items);
    Gateway gw(mock);
    CemSpec cem = CemSpec::make(CemKind::Base);

    SUBCASE("the fixed list has 12 phrases") { CHECK(phrase_list().size() == 12); }
    SUBCASE("empty phrase control: zero deltas") {
        AttackTableRow row = phrase_probe(cem, items, "", Surface::Query, gw);
        CHECK(*row.cf == doctest::Approx(*row.adv_cf));
        CHECK(*row.pct_affected == doctest::Approx(0.0));
        CHECK_FALSE(row.delta_down_mean.has_value());
        CHECK_FALSE(row.delta_up_mean.has_value());
    }
    SUBCASE("the lexical mock ignores confidence phrases entirely") {
        for (const auto& phrase : phrase_list()) {
            for (Surface s : {Surface::Query, Surface::SystemPrompt}) {
                AttackTableRow row = phrase_probe(cem, items, phrase, s, gw);
                CHECK(*row.cf == doctest::Approx(*row.adv_cf));
                CHECK(*row.pct_affected == doctest::Approx(0.0));
            }
        }
    }
    SUBCASE("unknown phrases are rejected") {
        CHECK_THROWS_AS(phrase_probe(cem, items, "be weird", Surface::Query, gw),
                        std::invalid_argument);
    }
}

TEST_CASE("report rendering handles null cells") {
    AttackTableRow row;
    row.cf = 80.0;
    row.adv_cf = 75.0;
    row.pct_affected = 50.0;
    const std::string csv = render_csv({{"demo", row}});
    CHECK(csv.find("demo,80,75,50,null,null,null,null") != std::string::npos);
    const std::string md = render_markdown({{"demo", row}});
    CHECK(md.find("| demo | 80 | 75 | 50 | null |") != std::string::npos);
}
