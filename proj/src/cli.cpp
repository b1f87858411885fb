#include "vca/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "vca/analysis.hpp"
#include "vca/harness.hpp"
#include "vca/hash.hpp"
#include "vca/http_client.hpp"

namespace vca {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::unique_ptr<Gateway> make_gateway(const RunConfig& cfg, const std::vector<McqItem>& items) {
    if (cfg.model == "mock") {
        return std::make_unique<Gateway>(std::make_shared<MockModel>(items), cfg.caching);
    }
    return std::make_unique<Gateway>(
        std::make_shared<HttpChatClient>(cfg.model, cfg.endpoint, cfg.api_key_env), cfg.caching);
}

void print_summary(const RunSummary& s) {
    std::cout << "items: " << s.items_total << " (run " << s.items_run << ", resumed past "
              << s.items_skipped << ", failed " << s.items_failed << ")\n";
    std::cout << render_markdown({{"run", s.metrics}});
}

int run_report(const std::string& in_path, const std::string& dataset, const std::string& format) {
    AttackTableRow row = report_from_file(in_path, dataset);
    if (format == "csv") {
        std::cout << render_csv({{in_path, row}});
    } else {
        std::cout << render_markdown({{in_path, row}});
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{
        "Verbal-confidence robustness harness: elicit confidence scores from "
        "chat models, attack them, apply defenses, and report metrics."};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name
    app.set_config("--config", "", "Config file (key=value); command-line flags take precedence");

    RunConfig cfg;
    app.add_option("--model", cfg.model, "Model name, or 'mock' for the offline model")
        ->capture_default_str();
    app.add_option("--endpoint", cfg.endpoint, "Chat-completions endpoint base URL");
    app.add_option("--api-key-env", cfg.api_key_env,
                   "Environment variable holding the bearer token");
    app.add_option("--dataset", cfg.dataset_path, "Dataset path (.jsonl or .csv)");
    app.add_option("--cem", cfg.cem, "base|cot|ms|sc|self_probe|likert")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
    app.add_option("--tau", cfg.tau, "Similarity gate threshold")->capture_default_str();
    app.add_option("--concurrency", cfg.concurrency, "Worker pool size")->capture_default_str();
    app.add_option("--out", cfg.out_path, "Output path");
    app.add_option("--sample", cfg.sample, "Evaluate a random sample of N items (0 = all)");
    app.add_option("--templates", cfg.templates_dir, "Prompt template directory");
    app.add_option("--synonyms", cfg.synonyms_path, "Synonym table JSON");
    app.add_option("--embeddings", cfg.embeddings_path, "Word-embedding file");
    app.add_option("--sc-samples", cfg.sc_samples, "SC sample count")->capture_default_str();
    app.add_flag("!--no-cache", cfg.caching, "Disable the response cache");

    // ---- elicit ----
    auto* elicit_cmd = app.add_subcommand("elicit", "Baseline elicitation (no attack)");

    // ---- attack ----
    auto* attack_cmd = app.add_subcommand("attack", "Run a perturbation attack");
    std::string attack_name = "ssr";
    attack_cmd->add_option("--attack", attack_name, "vca_tf|vca_tb|typos|ssr|none")
        ->capture_default_str();
    attack_cmd->add_option("--surface", cfg.surface, "query|system_prompt|demonstration")
        ->capture_default_str();
    attack_cmd->add_option("--defense", cfg.defense, "none|ppl|smooth|paraphrase")
        ->capture_default_str();
    attack_cmd->add_option("--calibration", cfg.calibration_path,
                           "Benign set for ppl calibration (default: the dataset)");
    attack_cmd->add_flag("!--no-stop-on-flip", cfg.stop_on_flip,
                         "Keep attacking after an answer flip");

    // ---- triggers ----
    auto* triggers_cmd = app.add_subcommand("triggers", "Trigger optimization and application");
    triggers_cmd->require_subcommand(1);
    auto* opt_cmd = triggers_cmd->add_subcommand("optimize", "Optimize a trigger");
    GaConfig ga;
    std::string variant = "tokens";
    std::string word_pool_path;
    std::string cems_csv = "base";
    opt_cmd->add_option("--variant", variant, "tokens (GA) | autodan (sentence)")
        ->capture_default_str();
    opt_cmd->add_option("--generations", ga.generations)->capture_default_str();
    opt_cmd->add_option("--prompts", ga.prompts)->capture_default_str();
    opt_cmd->add_option("--beta", ga.tokens_per_prompt)->capture_default_str();
    opt_cmd->add_option("--samples", ga.initial_samples)->capture_default_str();
    opt_cmd->add_option("--xi", ga.iter_samples)->capture_default_str();
    opt_cmd->add_option("--elites", ga.elites)->capture_default_str();
    opt_cmd->add_option("--cems", cems_csv, "Comma-separated CEM loss set")->capture_default_str();
    opt_cmd->add_option("--word-pool", word_pool_path, "Word pool file (one word per line)");
    opt_cmd->add_flag("--frozen-eval", ga.frozen_eval,
                      "Score prompts on one frozen sample per CEM");
    auto* apply_cmd = triggers_cmd->add_subcommand("apply", "Apply a saved trigger to a dataset");
    apply_cmd->add_option("--trigger", cfg.trigger_path, "Trigger JSON file")->required();
    apply_cmd->add_option("--defense", cfg.defense, "none|ppl|smooth|paraphrase")
        ->capture_default_str();

    // ---- defend ----
    auto* defend_cmd = app.add_subcommand("defend", "Re-run an attack configuration under a defense");
    defend_cmd->add_option("--attack", attack_name, "vca_tf|vca_tb|typos|ssr|none|trigger")
        ->capture_default_str();
    defend_cmd->add_option("--trigger", cfg.trigger_path, "Trigger JSON (attack=trigger)");
    defend_cmd->add_option("--surface", cfg.surface)->capture_default_str();
    defend_cmd->add_option("--defense", cfg.defense, "ppl|smooth|paraphrase")->required();
    defend_cmd->add_option("--calibration", cfg.calibration_path);

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "Render metrics from a results file");
    std::string report_in, report_format = "md";
    report_cmd->add_option("--in", report_in, "Results JSONL")->required();
    report_cmd->add_option("--format", report_format, "md|csv")->capture_default_str();

    // ---- stability ----
    auto* stability_cmd = app.add_subcommand("stability", "Word-removal stability curves");

    // ---- corrupt-ms ----
    auto* corrupt_cmd = app.add_subcommand("corrupt-ms", "Corrupt MS step confidences and re-elicit");
    std::string corrupt_mode = "mask";
    double corrupt_fraction = 0.5;
    corrupt_cmd->add_option("--mode", corrupt_mode, "mask|randomize")->capture_default_str();
    corrupt_cmd->add_option("--fraction", corrupt_fraction)->capture_default_str();

    // ---- phrases ----
    auto* phrases_cmd = app.add_subcommand("phrases", "Confidence-phrase probe");
    int phrase_id = -1;
    std::string phrase_surface = "query";
    phrases_cmd->add_option("--phrase-id", phrase_id, "0..11, or -1 for all")
        ->capture_default_str();
    phrases_cmd->add_option("--surface", phrase_surface, "query|system_prompt")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*report_cmd) {
            if (cfg.dataset_path.empty()) throw UsageError("report requires --dataset");
            return run_report(report_in, cfg.dataset_path, report_format);
        }

        if (cfg.dataset_path.empty()) throw UsageError("--dataset is required");

        if (*elicit_cmd) {
            cfg.attack = "none";
            if (cfg.out_path.empty()) throw UsageError("--out is required");
            print_summary(run_attack_suite(cfg));
            return 0;
        }
        if (*attack_cmd || *defend_cmd) {
            cfg.attack = attack_name;
            if (*defend_cmd && cfg.defense == "none") {
                throw UsageError("defend requires --defense");
            }
            if (cfg.out_path.empty()) throw UsageError("--out is required");
            print_summary(run_attack_suite(cfg));
            return 0;
        }
        if (*triggers_cmd) {
            if (*opt_cmd) {
                if (cfg.out_path.empty()) throw UsageError("--out is required");
                auto items = load_dataset(cfg.dataset_path);
                auto gateway = make_gateway(cfg, items);
                ga.rng_seed = cfg.seed;
                ga.word_pool =
                    word_pool_path.empty() ? builtin_word_pool() : load_word_pool(word_pool_path);
                ga.cem_set.clear();
                std::stringstream ss(cems_csv);
                std::string name;
                while (std::getline(ss, name, ',')) ga.cem_set.push_back(cem_from_name(name));

                TriggerArtifact art;
                auto progress = [](int g, double best) {
                    std::cerr << "generation " << g << ": best loss " << best << "\n";
                };
                if (variant == "tokens") {
                    art = optimize_triggers(ga, items, *gateway, progress);
                } else if (variant == "autodan") {
                    StaticSynonymProvider synonyms =
                        cfg.synonyms_path.empty()
                            ? StaticSynonymProvider()
                            : StaticSynonymProvider::from_json_file(cfg.synonyms_path);
                    std::unique_ptr<Rephraser> rephraser;
                    if (cfg.model == "mock") {
                        rephraser = std::make_unique<StubRephraser>();
                    } else {
                        rephraser = std::make_unique<LlmRephraser>(*gateway);
                    }
                    art = optimize_autodan(ga, items, *gateway, *rephraser, synonyms, progress);
                } else {
                    throw std::runtime_error("unknown trigger variant: " + variant);
                }
                art.save(cfg.out_path);
                std::cout << "trigger saved to " << cfg.out_path << " (loss " << art.loss << ")\n";
                return 0;
            }
            // triggers apply
            cfg.attack = "trigger";
            if (cfg.out_path.empty()) throw UsageError("--out is required");
            print_summary(run_attack_suite(cfg));
            return 0;
        }
        if (*stability_cmd) {
            auto items = load_dataset(cfg.dataset_path);
            auto gateway = make_gateway(cfg, items);
            CemSpec cem = CemSpec::make_from_dir(cem_from_name(cfg.cem), cfg.templates_dir);
            std::ostream* out = &std::cout;
            std::ofstream file;
            if (!cfg.out_path.empty()) {
                file.open(cfg.out_path);
                out = &file;
            }
            *out << "item_id,percent_removed,confidence,answer\n";
            for (const auto& item : items) {
                for (const auto& p :
                     stability_curve(cem, item, *gateway, derive_item_seed(cfg.seed, item.id))) {
                    *out << item.id << "," << p.percent_removed << "," << p.confidence << ","
                         << (p.answer == kNoAnswer ? '-' : p.answer) << "\n";
                }
            }
            return 0;
        }
        if (*corrupt_cmd) {
            auto items = load_dataset(cfg.dataset_path);
            auto gateway = make_gateway(cfg, items);
            CemSpec cem = CemSpec::make(CemKind::Ms);
            MsCorruptionMode mode =
                corrupt_mode == "mask" ? MsCorruptionMode::Mask : MsCorruptionMode::Randomize;
            for (const auto& item : items) {
                const long seed = derive_item_seed(cfg.seed, item.id);
                auto res = elicit(cem, item, *gateway, {}, seed);
                if (!res.ms_trace || res.ms_trace->steps.empty()) {
                    std::cout << item.id << ": no steps to corrupt\n";
                    continue;
                }
                Verdict corrupted =
                    ms_corruption(*res.ms_trace, item, mode, corrupt_fraction,
                                  static_cast<unsigned long long>(seed), *gateway);
                std::cout << item.id << ": original " << res.verdict.confidence << " -> corrupted "
                          << corrupted.confidence << "\n";
            }
            return 0;
        }
        if (*phrases_cmd) {
            auto items = load_dataset(cfg.dataset_path);
            auto gateway = make_gateway(cfg, items);
            CemSpec cem = CemSpec::make_from_dir(cem_from_name(cfg.cem), cfg.templates_dir);
            Surface surf = surface_from_string(phrase_surface);
            std::vector<std::pair<std::string, AttackTableRow>> rows;
            if (phrase_id >= 0) {
                const std::string& phrase = phrase_list().at(static_cast<size_t>(phrase_id));
                rows.emplace_back(phrase, phrase_probe(cem, items, phrase, surf, *gateway));
            } else {
                for (const auto& phrase : phrase_list()) {
                    rows.emplace_back(phrase, phrase_probe(cem, items, phrase, surf, *gateway));
                }
            }
            std::cout << render_markdown(rows);
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace vca
