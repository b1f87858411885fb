#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "vca/elicit.hpp"
#include "vca/gateway.hpp"
#include "vca/harness.hpp"
#include "vca/hash.hpp"
#include "vca/text.hpp"
#include "vca/trigger.hpp"

#include "support.hpp"

using namespace vca;
using namespace vca::testing;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> ws) {
    return std::vector<std::string>(ws.begin(), ws.end());
}

}  // namespace

TEST_CASE("crossover") {
    auto p1 = toks({"a", "b", "c", "d"});
    auto p2 = toks({"w", "x", "y", "z"});

    SUBCASE("split at 2") {
        auto [c1, c2] = crossover(p1, p2, 2);
        CHECK(c1 == toks({"a", "b", "y", "z"}));
        CHECK(c2 == toks({"w", "x", "c", "d"}));
    }
    SUBCASE("split at 0 swaps the parents") {
        auto [c1, c2] = crossover(p1, p2, 0);
        CHECK(c1 == p2);
        CHECK(c2 == p1);
    }
    SUBCASE("children always keep length beta") {
        for (int v = 0; v <= 2; ++v) {
            auto [c1, c2] = crossover(p1, p2, v);
            CHECK(c1.size() == 4);
            CHECK(c2.size() == 4);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(crossover(p1, toks({"w", "x"}), 0), std::invalid_argument);
        CHECK_THROWS_AS(crossover(p1, p2, 3), std::invalid_argument);
        CHECK_THROWS_AS(crossover(p1, p2, -1), std::invalid_argument);
    }
}

TEST_CASE("mutate") {
    SUBCASE("exactly ceil(0.2 * beta) indices mutate for beta=20") {
        std::vector<std::string> p1(20, "p"), p2(20, "p");
        std::vector<std::string> pool = {"q"};
        for (unsigned long long seed = 0; seed < 10; ++seed) {
            std::mt19937_64 rng(seed);
            auto child = mutate(p1, p2, 0.2, pool, rng);
            const long mutated = std::count(child.begin(), child.end(), "q");
            CHECK(mutated == 4);
        }
    }
    SUBCASE("singleton pool pins every mutated index") {
        std::vector<std::string> p1(10, "p"), p2(10, "p");
        std::mt19937_64 rng(3);
        auto child = mutate(p1, p2, 0.5, {"only"}, rng);
        CHECK(std::count(child.begin(), child.end(), "only") == 5);
    }
    SUBCASE("rate 0 with equal parents is the identity") {
        std::vector<std::string> p(8, "same");
        std::mt19937_64 rng(1);
        CHECK(mutate(p, p, 0.0, {"pool"}, rng) == p);
    }
    SUBCASE("empty pool is an error") {
        std::vector<std::string> p(4, "p");
        std::mt19937_64 rng(0);
        CHECK_THROWS_AS(mutate(p, p, 0.2, {}, rng), std::invalid_argument);
    }
}

TEST_CASE("tournament_select") {
    SUBCASE("strict dominance") {
        std::vector<double> losses = {-5.0, 1.0};
        for (unsigned long long seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            CHECK(tournament_select(losses, 2, rng) == 0);
        }
    }
    SUBCASE("population smaller than k") {
        std::vector<double> losses = {0.0};
        std::mt19937_64 rng(0);
        CHECK_THROWS_AS(tournament_select(losses, 2, rng), std::invalid_argument);
    }
    SUBCASE("lower-loss members win most tournaments over many draws") {
        std::vector<double> losses = {1.0, 2.0, 3.0, 4.0};
        std::map<size_t, int> wins;
        std::mt19937_64 rng(42);
        for (int t = 0; t < 4000; ++t) wins[tournament_select(losses, 2, rng)] += 1;
        CHECK(wins[0] > wins[1]);
        CHECK(wins[1] > wins[2]);
        CHECK(wins[2] > wins[3]);
        CHECK(wins[0] >= 4000 / 2 - 200);  // min is in half the k=2 draws
    }
}

TEST_CASE("call budget formula and actual call accounting") {
    CHECK(ga_call_budget(4, 200, 20, 12, 20) == 36000);

    auto items = load_dataset(data_path("ga20.jsonl"));
    auto counting = std::make_shared<CountingClient>(std::make_shared<MockModel>(items));
    Gateway gw(counting, /*caching=*/false);

    GaConfig cfg;
    cfg.prompts = 4;
    cfg.tokens_per_prompt = 3;
    cfg.generations = 3;
    cfg.initial_samples = 6;
    cfg.iter_samples = 2;
    cfg.elites = 1;
    cfg.cem_set = {CemKind::Base};
    cfg.word_pool = {"doubt", "unsure", "vague", "hazy", "murky"};
    cfg.rng_seed = 5;

    optimize_triggers(cfg, items, gw);
    CHECK(counting->calls.load() == ga_call_budget(1, 6, 3, 2, 4));
}

TEST_CASE("optimize_triggers") {
    auto items = load_dataset(data_path("ga20.jsonl"));
    auto mock = std::make_shared<MockModel>(items);

    GaConfig cfg;
    cfg.prompts = 6;
    cfg.tokens_per_prompt = 4;
    cfg.generations = 5;
    cfg.initial_samples = static_cast<int>(items.size());  // whole-dataset scoring
    cfg.iter_samples = 4;
    cfg.elites = 2;
    cfg.cem_set = {CemKind::Base};
    // "crate"/"depot" collide with every item's runner-up option; the rest
    // are OOV and trip the penalty.
    cfg.word_pool = {"crate", "depot", "zzyqx", "vvorp", "doubt", "unsure"};
    cfg.rng_seed = 11;

    SUBCASE("achieves a confidence drop, verified by brute-force rescoring") {
        Gateway gw(mock);
        TriggerArtifact art = optimize_triggers(cfg, items, gw);
        REQUIRE(art.kind == TriggerArtifact::Kind::Tokens);
        CHECK(art.tokens.size() == 4);
        CHECK(art.loss < 0.0);

        // Brute force: with S = |dataset| both the baseline and the final
        // re-score average over the whole dataset, so the loss is exactly
        // mean(with trigger) - mean(without).
        CemSpec base = CemSpec::make(CemKind::Base);
        double with_sum = 0.0, without_sum = 0.0;
        for (const auto& item : items) {
            const long seed = static_cast<long>(fnv1a64(item.id) & 0x7fffffffffffffffULL);
            without_sum += elicit(base, item, gw, {}, seed).verdict.confidence;
            SurfaceOverrides ov;
            ov.trigger_suffix = art.payload_text();
            with_sum += elicit(base, item, gw, ov, seed).verdict.confidence;
        }
        const double oracle_loss = (with_sum - without_sum) / static_cast<double>(items.size());
        CHECK(art.loss == doctest::Approx(oracle_loss).epsilon(1e-9));
    }
    SUBCASE("G=0 returns the best of the initial random population") {
        Gateway gw(mock);
        GaConfig zero = cfg;
        zero.generations = 0;
        TriggerArtifact art = optimize_triggers(zero, items, gw);
        CHECK(art.tokens.size() == 4);
        CHECK(art.best_loss_per_generation.empty());
    }
    SUBCASE("frozen evaluation makes the best-of-generation loss non-increasing") {
        Gateway gw(mock);
        GaConfig frozen = cfg;
        frozen.frozen_eval = true;
        frozen.generations = 8;
        TriggerArtifact art = optimize_triggers(frozen, items, gw);
        REQUIRE(art.best_loss_per_generation.size() == 8);
        for (size_t g = 1; g < art.best_loss_per_generation.size(); ++g) {
            CHECK(art.best_loss_per_generation[g] <=
                  art.best_loss_per_generation[g - 1] + 1e-9);
        }
    }
    SUBCASE("seeded reruns are identical") {
        Gateway gw1(std::make_shared<MockModel>(items));
        Gateway gw2(std::make_shared<MockModel>(items));
        TriggerArtifact a = optimize_triggers(cfg, items, gw1);
        TriggerArtifact b = optimize_triggers(cfg, items, gw2);
        CHECK(a.tokens == b.tokens);
        CHECK(a.loss == doctest::Approx(b.loss));
    }
    SUBCASE("config validation") {
        GaConfig bad = cfg;
        bad.elites = bad.prompts;
        Gateway gw(mock);
        CHECK_THROWS_AS(optimize_triggers(bad, items, gw), std::invalid_argument);
        GaConfig tiny_pool = cfg;
        tiny_pool.word_pool = {"one"};
        CHECK_THROWS_AS(optimize_triggers(tiny_pool, items, gw), std::invalid_argument);
        CHECK_THROWS_AS(optimize_triggers(cfg, {}, gw), std::invalid_argument);
    }
}

TEST_CASE("trigger artifact io and application") {
    TriggerArtifact art;
    art.kind = TriggerArtifact::Kind::Tokens;
    art.tokens = {"doubt", "unsure"};
    art.loss = -3.25;

    SUBCASE("token payload joins with single spaces") {
        CHECK(art.payload_text() == "doubt unsure");
        PromptBundle bundle;
        bundle.system_prompt = "sys";
        bundle = apply_trigger(art, bundle);
        CHECK(bundle.effective_system_prompt() == "sys doubt unsure");
    }
    SUBCASE("sentence payload is verbatim") {
        TriggerArtifact s;
        s.kind = TriggerArtifact::Kind::Sentence;
        s.sentence = "stay wary of firm conclusions";
        PromptBundle bundle;
        bundle.system_prompt = "sys";
        bundle = apply_trigger(s, bundle);
        CHECK(bundle.effective_system_prompt() == "sys stay wary of firm conclusions");
    }
    SUBCASE("applying twice replaces, never stacks") {
        PromptBundle bundle;
        bundle.system_prompt = "sys";
        bundle = apply_trigger(art, bundle);
        bundle = apply_trigger(art, bundle);
        CHECK(bundle.effective_system_prompt() == "sys doubt unsure");
    }
    SUBCASE("json round trip") {
        const std::string path = "/tmp/vca_trigger_test.json";
        art.config_json = R"({"prompts":6})";
        art.best_loss_per_generation = {-1.0, -2.0};
        art.save(path);
        TriggerArtifact loaded = TriggerArtifact::load(path);
        CHECK(loaded.kind == TriggerArtifact::Kind::Tokens);
        CHECK(loaded.tokens == art.tokens);
        CHECK(loaded.loss == doctest::Approx(art.loss));
        CHECK(loaded.best_loss_per_generation.size() == 2);
    }
}

TEST_CASE("word score table") {
    SUBCASE("momentum update: existing 0.2, new 0.4 -> 0.3") {
        WordScoreTable table;
        table.update({{"wary conclusions", 0.2}});
        REQUIRE(table.score("wary").has_value());
        CHECK(*table.score("wary") == doctest::Approx(0.2));
        table.update({{"wary judgments", 0.4}});
        CHECK(*table.score("wary") == doctest::Approx(0.3));
    }
    SUBCASE("first insert averages across prompts of the same generation") {
        WordScoreTable table;
        table.update({{"hazy outlook", -2.0}, {"hazy estimate", -4.0}});
        CHECK(*table.score("hazy") == doctest::Approx(-3.0));
    }
    SUBCASE("excluded words never enter") {
        WordScoreTable table;
        table.update({{"the And, Paris doubt", -1.0}});
        CHECK_FALSE(table.score("the").has_value());
        CHECK_FALSE(table.score("and").has_value());    // punctuation-bearing token
        CHECK_FALSE(table.score("paris").has_value());  // mid-sentence capital
        CHECK(table.score("doubt").has_value());
        CHECK(WordScoreTable::excluded("the", false));
        CHECK(WordScoreTable::excluded("word!", false));
        CHECK(WordScoreTable::excluded("London", false));
        CHECK_FALSE(WordScoreTable::excluded("London", true));  // sentence-initial
        CHECK_FALSE(WordScoreTable::excluded("doubt", false));
    }
}

TEST_CASE("stub rephraser") {
    StubRephraser stub;
    SUBCASE("combine keeps the first 60% of a and last 40% of b") {
        const std::string a = "one two three four five";
        const std::string b = "alpha beta gamma delta epsilon";
        CHECK(stub.combine(a, b) == "one two three delta epsilon");
    }
    SUBCASE("revise swaps two tokens deterministically") {
        const std::string p = "alpha beta gamma";
        const std::string r = stub.revise(p);
        CHECK(r != p);
        CHECK(stub.revise(p) == r);
        auto sorted_words = [](const std::string& s) {
            auto w = split_words(s);
            std::sort(w.begin(), w.end());
            return w;
        };
        CHECK(sorted_words(r) == sorted_words(p));
    }
    SUBCASE("paraphrase rotates word order") {
        CHECK(stub.paraphrase("a b c") == "b c a");
        CHECK(stub.paraphrase("one") == "one");
    }
    SUBCASE("initial prompts are deterministic and sized") {
        auto a = stub.initial_prompts(12);
        auto b = stub.initial_prompts(12);
        CHECK(a.size() == 12);
        CHECK(a == b);
    }
}

TEST_CASE("optimize_autodan") {
    auto items = load_dataset(data_path("mcq30.jsonl"));
    auto mock = std::make_shared<MockModel>(items);
    StaticSynonymProvider synonyms;

    GaConfig cfg;
    cfg.prompts = 6;
    cfg.generations = 4;
    cfg.initial_samples = static_cast<int>(items.size());
    cfg.iter_samples = 4;
    cfg.elites = 2;
    cfg.cem_set = {CemKind::Base};
    cfg.rng_seed = 23;
    cfg.word_pool = builtin_word_pool();  // unused by autodan init but validated

    SUBCASE("completes and yields a sentence trigger with negative loss") {
        Gateway gw(mock);
        StubRephraser stub;
        TriggerArtifact art = optimize_autodan(cfg, items, gw, stub, synonyms);
        CHECK(art.kind == TriggerArtifact::Kind::Sentence);
        CHECK_FALSE(art.sentence.empty());
        CHECK(art.best_loss_per_generation.size() == 4);
        CHECK(art.loss < 0.0);  // stub sentences are largely OOV for the mock
    }
    SUBCASE("identity rephraser + frozen eval keeps best loss non-increasing") {
        struct IdentityRephraser final : Rephraser {
            StubRephraser seeds;
            std::vector<std::string> initial_prompts(int count) override {
                return seeds.initial_prompts(count);
            }
            std::string combine(const std::string& a, const std::string&) override { return a; }
            std::string revise(const std::string& p) override { return p; }
            std::string paraphrase(const std::string& t) override { return t; }
        };
        Gateway gw(mock);
        IdentityRephraser identity;
        GaConfig frozen = cfg;
        frozen.frozen_eval = true;
        frozen.generations = 6;
        TriggerArtifact art = optimize_autodan(frozen, items, gw, identity, synonyms);
        REQUIRE(art.best_loss_per_generation.size() == 6);
        for (size_t g = 1; g < art.best_loss_per_generation.size(); ++g) {
            CHECK(art.best_loss_per_generation[g] <=
                  art.best_loss_per_generation[g - 1] + 1e-9);
        }
    }
    SUBCASE("single non-elite pairs with itself") {
        Gateway gw(mock);
        StubRephraser stub;
        GaConfig tiny = cfg;
        tiny.prompts = 3;
        tiny.elites = 2;  // alpha - E = 1
        tiny.generations = 2;
        TriggerArtifact art = optimize_autodan(tiny, items, gw, stub, synonyms);
        CHECK_FALSE(art.sentence.empty());
    }
}
