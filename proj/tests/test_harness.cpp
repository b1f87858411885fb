#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vca/cli.hpp"
#include "vca/harness.hpp"

#include "support.hpp"

using namespace vca;
using namespace vca::testing;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

RunConfig base_config(const std::string& out) {
    RunConfig cfg;
    cfg.dataset_path = data_path("mcq10.jsonl");
    cfg.cem = "base";
    cfg.attack = "ssr";
    cfg.seed = 7;
    cfg.out_path = out;
    cfg.synonyms_path = data_path("ssr_synonyms.json");
    return cfg;
}

int dispatch(std::vector<std::string> args) {
    std::vector<const char*> argv = {"vca"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("load_dataset") {
    SUBCASE("jsonl schema mapping") {
        auto items = load_dataset(data_path("mcq10.jsonl"));
        CHECK(items.size() == 10);
        CHECK(items[0].id == "h0");
        CHECK(items[0].options.size() == 4);
        CHECK(items[0].gold_index == 0);
    }
    SUBCASE("invalid gold index is rejected with the line number") {
        const std::string path = tmp_path("vca_bad_gold.jsonl");
        spit(path, R"({"id":"q1","question":"q","options":["a","b","c","d"],"answer":7})"
                   "\n");
        try {
            load_dataset(path);
            FAIL("expected a parse failure");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        }
    }
    SUBCASE("true/false rows normalize to a 2-option MCQ") {
        const std::string path = tmp_path("vca_tf.jsonl");
        spit(path,
             R"({"id":"q1","question":"the sky is broad","answer":true})"
             "\n"
             R"({"id":"q2","question":"stones float upward","answer":false})"
             "\n");
        auto items = load_dataset(path);
        REQUIRE(items.size() == 2);
        CHECK(items[0].options == std::vector<std::string>{"True", "False"});
        CHECK(items[0].gold_index == 0);
        CHECK(items[1].gold_index == 1);
    }
    SUBCASE("duplicate ids are rejected") {
        const std::string path = tmp_path("vca_dup.jsonl");
        spit(path,
             R"({"id":"q1","question":"one","options":["a","b"],"answer":0})"
             "\n"
             R"({"id":"q1","question":"two","options":["a","b"],"answer":0})"
             "\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("duplicate id"),
                             std::runtime_error);
    }
    SUBCASE("letter answers resolve to option indices") {
        const std::string path = tmp_path("vca_letter.jsonl");
        spit(path, R"({"id":"q1","question":"which tone","options":["low","mid","high"],"answer":"B"})"
                   "\n");
        auto items = load_dataset(path);
        CHECK(items[0].gold_index == 1);
    }
    SUBCASE("csv format with quoted cells and true/false rows") {
        auto items = load_dataset(data_path("mcq.csv"));
        REQUIRE(items.size() == 3);
        CHECK(items[0].options.size() == 4);
        CHECK(items[1].question == "the violin, far from the meadow, hums");
        CHECK(items[2].options == std::vector<std::string>{"True", "False"});
    }
    SUBCASE("malformed json carries the line number") {
        const std::string path = tmp_path("vca_broken.jsonl");
        spit(path, "{\"id\":\"q1\"\n");
        CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 1"), std::runtime_error);
    }
}

TEST_CASE("run_attack_suite determinism and persistence") {
    SUBCASE("fixed seed gives byte-identical results across runs") {
        const std::string out1 = tmp_path("vca_run1.jsonl");
        const std::string out2 = tmp_path("vca_run2.jsonl");
        fs::remove(out1);
        fs::remove(out2);
        run_attack_suite(base_config(out1));
        run_attack_suite(base_config(out2));
        const std::string a = slurp(out1);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(out2));
    }
    SUBCASE("parallelism never changes the results file") {
        const std::string serial_out = tmp_path("vca_serial.jsonl");
        const std::string parallel_out = tmp_path("vca_parallel.jsonl");
        fs::remove(serial_out);
        fs::remove(parallel_out);
        RunConfig serial = base_config(serial_out);
        serial.concurrency = 1;
        RunConfig parallel = base_config(parallel_out);
        parallel.concurrency = 4;
        run_attack_suite(serial);
        run_attack_suite(parallel);
        CHECK(slurp(serial_out) == slurp(parallel_out));
    }
    SUBCASE("kill-and-resume reproduces the uninterrupted file") {
        const std::string full_out = tmp_path("vca_full.jsonl");
        const std::string resumed_out = tmp_path("vca_resumed.jsonl");
        fs::remove(full_out);
        fs::remove(resumed_out);
        run_attack_suite(base_config(full_out));
        const std::string full = slurp(full_out);

        // Simulate a crash after four records plus a torn fifth line.
        std::vector<std::string> lines;
        std::stringstream ss(full);
        std::string line;
        while (std::getline(ss, line)) lines.push_back(line);
        REQUIRE(lines.size() == 10);
        std::string partial;
        for (int i = 0; i < 4; ++i) partial += lines[static_cast<size_t>(i)] + "\n";
        partial += lines[4].substr(0, lines[4].size() / 2);
        spit(resumed_out, partial);

        RunSummary summary = run_attack_suite(base_config(resumed_out));
        CHECK(summary.items_skipped == 4);
        CHECK(summary.items_run == 6);
        CHECK(slurp(resumed_out) == full);
    }
    SUBCASE("resume refuses a different configuration") {
        const std::string out = tmp_path("vca_conf.jsonl");
        fs::remove(out);
        run_attack_suite(base_config(out));
        RunConfig other = base_config(out);
        other.seed = 8;
        CHECK_THROWS_WITH_AS(run_attack_suite(other), doctest::Contains("different config"),
                             std::runtime_error);
    }
    SUBCASE("attack none is a pure elicitation baseline") {
        const std::string out = tmp_path("vca_none.jsonl");
        fs::remove(out);
        RunConfig cfg = base_config(out);
        cfg.attack = "none";
        RunSummary summary = run_attack_suite(cfg);
        CHECK(*summary.metrics.pct_affected == doctest::Approx(0.0));
        for (const auto& r : load_results(out)) {
            CHECK(r.original.confidence == r.adversarial.confidence);
            CHECK(r.iterations == 0);
        }
    }
}

TEST_CASE("report round-trips through the persisted file") {
    const std::string out = tmp_path("vca_report.jsonl");
    fs::remove(out);
    RunConfig cfg = base_config(out);
    RunSummary summary = run_attack_suite(cfg);
    AttackTableRow reread = report_from_file(out, cfg.dataset_path);
    CHECK(*reread.cf == doctest::Approx(*summary.metrics.cf).epsilon(1e-12));
    CHECK(*reread.adv_cf == doctest::Approx(*summary.metrics.adv_cf).epsilon(1e-12));
    CHECK(*reread.pct_affected == doctest::Approx(*summary.metrics.pct_affected).epsilon(1e-12));
    CHECK(reread.delta_aff_cf.has_value() == summary.metrics.delta_aff_cf.has_value());
    if (reread.delta_aff_cf) {
        CHECK(*reread.delta_aff_cf ==
              doctest::Approx(*summary.metrics.delta_aff_cf).epsilon(1e-12));
    }
}

TEST_CASE("config hash is stable and field-sensitive") {
    RunConfig a = base_config("x.jsonl");
    RunConfig b = base_config("y.jsonl");  // out path is not part of the hash
    CHECK(a.config_hash() == b.config_hash());
    b.seed = 99;
    CHECK(a.config_hash() != b.config_hash());
}

TEST_CASE("result records survive the JSONL round trip") {
    ResultRecord r;
    r.item_id = "q1";
    r.cem = "base";
    r.attack = "ssr";
    r.surface = Surface::Demonstration;
    r.original.answer = 'B';
    r.original.confidence = 72.5;
    r.adversarial.answer = kNoAnswer;
    r.adversarial.confidence = 25.0;
    r.adversarial.defaulted = true;
    r.iterations = 9;
    r.original_text = "text with \"quotes\" and\nnewlines";
    r.adversarial_text = "perturbed";
    r.flipped = true;
    r.defense_log_ppl = 1.25;
    r.defense_filtered = true;
    r.config_hash = "abc";
    ResultRecord back = ResultRecord::from_json_line(r.to_json_line());
    CHECK(back.item_id == r.item_id);
    CHECK(back.surface == Surface::Demonstration);
    CHECK(back.original.answer == 'B');
    CHECK(back.original.confidence == doctest::Approx(72.5));
    CHECK_FALSE(back.adversarial.has_answer());
    CHECK(back.adversarial.defaulted);
    CHECK(back.iterations == 9);
    CHECK(back.original_text == r.original_text);
    CHECK(back.flipped);
    CHECK(*back.defense_log_ppl == doctest::Approx(1.25));
    CHECK(*back.defense_filtered);
    CHECK_FALSE(back.error.has_value());
}

TEST_CASE("defended runs annotate records") {
    SUBCASE("ppl defense marks triggered prompts, not benign ones") {
        const std::string trigger_path = tmp_path("vca_trigger.json");
        TriggerArtifact art;
        art.kind = TriggerArtifact::Kind::Tokens;
        art.tokens = {"zzyqx", "vvorp", "doubt"};
        art.save(trigger_path);

        const std::string out = tmp_path("vca_ppl.jsonl");
        fs::remove(out);
        RunConfig cfg = base_config(out);
        cfg.attack = "trigger";
        cfg.trigger_path = trigger_path;
        cfg.defense = "ppl";
        run_attack_suite(cfg);
        int filtered = 0, total = 0;
        for (const auto& r : load_results(out)) {
            REQUIRE(r.defense_filtered.has_value());
            ++total;
            filtered += *r.defense_filtered ? 1 : 0;
        }
        CHECK(total == 10);
        CHECK(filtered == total);  // the OOV suffix trips every prompt
    }
    SUBCASE("smooth defense with the default q keeps verdicts in range") {
        const std::string out = tmp_path("vca_smooth.jsonl");
        fs::remove(out);
        RunConfig cfg = base_config(out);
        cfg.attack = "none";
        cfg.defense = "smooth";
        run_attack_suite(cfg);
        for (const auto& r : load_results(out)) {
            CHECK(r.adversarial.confidence >= 25.0 - 1e-9);
            CHECK(r.adversarial.confidence <= 100.0 + 1e-9);
        }
    }
}

TEST_CASE("sampling selects a seeded subset and records it") {
    const std::string out = tmp_path("vca_sampled.jsonl");
    fs::remove(out);
    RunConfig cfg = base_config(out);
    cfg.sample = 4;
    RunSummary summary = run_attack_suite(cfg);
    CHECK(summary.items_total == 4);
    CHECK(load_results(out).size() == 4);

    const std::string out2 = tmp_path("vca_sampled2.jsonl");
    fs::remove(out2);
    RunConfig cfg2 = base_config(out2);
    cfg2.sample = 4;
    run_attack_suite(cfg2);
    CHECK(slurp(out) == slurp(out2));  // sampling is part of the seeded replay
}

TEST_CASE("paraphrase-defended runs complete against the stub rephraser") {
    const std::string out = tmp_path("vca_para.jsonl");
    fs::remove(out);
    RunConfig cfg = base_config(out);
    cfg.attack = "none";
    cfg.defense = "paraphrase";
    RunSummary summary = run_attack_suite(cfg);
    CHECK(summary.items_failed == 0);
    // Word-order rotation preserves the mock's token set, so confidence is
    // unchanged; the defended verdicts are still recorded per item.
    for (const auto& r : load_results(out)) {
        CHECK_FALSE(r.error.has_value());
        CHECK(r.adversarial.confidence == doctest::Approx(r.original.confidence));
    }
}

TEST_CASE("every persisted verdict stays inside [0, 100]") {
    const std::string out = tmp_path("vca_range.jsonl");
    fs::remove(out);
    run_attack_suite(base_config(out));
    for (const auto& r : load_results(out)) {
        CHECK(r.original.confidence >= 0.0);
        CHECK(r.original.confidence <= 100.0);
        CHECK(r.adversarial.confidence >= 0.0);
        CHECK(r.adversarial.confidence <= 100.0);
    }
}

TEST_CASE("an embedding file backs the synonym provider end to end") {
    // h0's question mentions "falcon"; its nearest neighbour is OOV for the
    // mock, so VCA-TF finds a real drop through the embedding lookup.
    const std::string vectors = tmp_path("vca_vectors.txt");
    spit(vectors,
         "falcon 1.0 0.0\n"
         "hawkish 0.95 0.1\n"
         "kelp 0.0 1.0\n"
         "weedy 0.1 0.95\n");
    const std::string out = tmp_path("vca_embed_run.jsonl");
    fs::remove(out);
    RunConfig cfg = base_config(out);
    cfg.attack = "vca_tf";
    cfg.synonyms_path.clear();
    cfg.embeddings_path = vectors;
    cfg.tau = 0.7;  // short questions: keep the gate out of the way
    RunSummary summary = run_attack_suite(cfg);
    CHECK(summary.items_failed == 0);
    CHECK(*summary.metrics.pct_affected > 0.0);
    bool h0_dropped = false;
    for (const auto& r : load_results(out)) {
        if (r.item_id == "h0" && r.adversarial.confidence < r.original.confidence) {
            h0_dropped = true;
            CHECK(r.adversarial_text.find("hawkish") != std::string::npos);
        }
    }
    CHECK(h0_dropped);
}

TEST_CASE("a saved trigger transfers to a different dataset") {
    const std::string trig = tmp_path("vca_transfer_trigger.json");
    TriggerArtifact art;
    art.kind = TriggerArtifact::Kind::Tokens;
    art.tokens = {"zzyqx", "vvorp", "doubt", "unsure"};  // OOV everywhere
    art.save(trig);

    const std::string out = tmp_path("vca_transfer.jsonl");
    fs::remove(out);
    RunConfig cfg;
    cfg.dataset_path = data_path("mcq30.jsonl");  // not the optimization set
    cfg.attack = "trigger";
    cfg.trigger_path = trig;
    cfg.seed = 5;
    cfg.out_path = out;
    RunSummary summary = run_attack_suite(cfg);
    CHECK(*summary.metrics.adv_cf < *summary.metrics.cf);  // OOV penalty transfers
}

TEST_CASE("cli dispatch") {
    SUBCASE("attack subcommand succeeds end to end") {
        const std::string out = tmp_path("vca_cli_run.jsonl");
        fs::remove(out);
        CHECK(dispatch({"attack", "--model", "mock", "--cem", "base", "--attack", "ssr",
                        "--dataset", data_path("mcq10.jsonl"), "--seed", "7", "--out", out,
                        "--synonyms", data_path("ssr_synonyms.json")}) == 0);
        CHECK(fs::exists(out));

        SUBCASE("report reads it back in both formats") {
            CHECK(dispatch({"report", "--in", out, "--dataset", data_path("mcq10.jsonl"),
                            "--format", "md"}) == 0);
            CHECK(dispatch({"report", "--in", out, "--dataset", data_path("mcq10.jsonl"),
                            "--format", "csv"}) == 0);
        }
    }
    SUBCASE("missing --dataset is a usage error (exit 1)") {
        CHECK(dispatch({"attack", "--model", "mock", "--attack", "ssr", "--out",
                        tmp_path("never.jsonl")}) == 1);
    }
    SUBCASE("unknown flags are usage errors") {
        CHECK(dispatch({"attack", "--definitely-not-a-flag"}) == 1);
    }
    SUBCASE("runtime failures exit 2") {
        CHECK(dispatch({"attack", "--model", "mock", "--attack", "ssr", "--dataset",
                        "/nonexistent/nope.jsonl", "--out", tmp_path("never2.jsonl")}) == 2);
    }
    SUBCASE("trigger optimize then apply") {
        const std::string trig = tmp_path("vca_cli_trigger.json");
        const std::string out = tmp_path("vca_cli_trig_run.jsonl");
        fs::remove(out);
        CHECK(dispatch({"triggers", "optimize", "--model", "mock", "--dataset",
                        data_path("ga20.jsonl"), "--seed", "3", "--out", trig, "--generations",
                        "2", "--prompts", "4", "--beta", "3", "--samples", "5", "--xi", "2",
                        "--elites", "1", "--cems", "base"}) == 0);
        CHECK(fs::exists(trig));
        CHECK(dispatch({"triggers", "apply", "--model", "mock", "--dataset",
                        data_path("ga20.jsonl"), "--trigger", trig, "--seed", "3", "--out",
                        out}) == 0);
        AttackTableRow row = report_from_file(out, data_path("ga20.jsonl"));
        CHECK(*row.adv_cf <= *row.cf);
    }
    SUBCASE("config file supplies flags, cli overrides") {
        const std::string conf = tmp_path("vca_cli.conf");
        const std::string out = tmp_path("vca_cli_conf_run.jsonl");
        fs::remove(out);
        spit(conf, "model=mock\ndataset=" + data_path("mcq10.jsonl") + "\nseed=7\nout=" + out +
                       "\n");
        CHECK(dispatch({"elicit", "--config", conf}) == 0);
        CHECK(fs::exists(out));
    }
}
