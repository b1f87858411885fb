#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vca/analysis.hpp"
#include "vca/core.hpp"
#include "vca/defense.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"
#include "vca/perturb.hpp"
#include "vca/trigger.hpp"

namespace vca {

/// Everything one run needs. A key=value config file may supply any field;
/// CLI flags override the file.
struct RunConfig {
    std::string model = "mock";  // "mock" or a wire model name
    std::string endpoint;
    std::string api_key_env;
    std::string dataset_path;
    std::string cem = "base";
    std::string attack = "none";  // none | vca_tf | vca_tb | typos | ssr | trigger
    std::string surface = "query";
    std::string defense = "none";  // none | ppl | smooth | paraphrase
    std::string calibration_path;  // ppl calibration set; empty = run dataset
    std::string trigger_path;      // required for attack=trigger
    std::string synonyms_path;     // JSON synonym table (empty = built-in)
    std::string embeddings_path;   // word-vector file (overrides synonyms)
    std::string templates_dir;
    std::string out_path;
    unsigned long long seed = 0;
    int concurrency = 1;
    int sample = 0;  // 0 = whole dataset
    double tau = 0.8;
    int sc_samples = 3;
    int typos_max_iters = 25;
    int n_syn = 50;
    bool stop_on_flip = true;
    bool caching = true;

    std::string to_json() const;
    /// Stable across field reordering (canonical sorted-key serialization).
    std::string config_hash() const;
};

enum class DatasetFormat { Auto, Jsonl, Csv };

/// Load and validate a dataset. JSONL rows:
///   {"id": str, "question": str, "options": [str...], "answer": int|bool|letter}
/// true/false rows normalize to options ["True","False"]. CSV columns:
/// id,question,options,answer with options '|'-separated. Duplicate ids and
/// invalid gold indices are rejected with the offending line number.
std::vector<McqItem> load_dataset(const std::string& path,
                                  DatasetFormat format = DatasetFormat::Auto);

/// One persisted line of a results file.
struct ResultRecord {
    std::string item_id;
    std::string cem;
    std::string attack;
    Surface surface = Surface::Query;
    Verdict original;
    Verdict adversarial;
    long iterations = 0;
    std::string original_text;
    std::string adversarial_text;
    bool flipped = false;
    std::optional<double> defense_log_ppl;
    std::optional<bool> defense_filtered;
    std::optional<std::string> error;
    std::string config_hash;

    std::string to_json_line() const;
    static ResultRecord from_json_line(const std::string& line);
};

struct RunSummary {
    int items_total = 0;
    int items_run = 0;      // newly computed this invocation
    int items_skipped = 0;  // already present (resume)
    int items_failed = 0;
    AttackTableRow metrics;
    std::string results_path;
};

/// Elicit + attack + optional defense per item, appending one JSONL record
/// per item in dataset order. Interrupted runs resume by skipping ids
/// already present. Item-level work runs on an OpenMP pool when concurrency
/// > 1; the writer is the single serialization point, so the output is
/// byte-identical across concurrency levels.
RunSummary run_attack_suite(const RunConfig& cfg);

/// Load a results file and recompute the metrics row (gold answers come
/// from the dataset).
AttackTableRow report_from_file(const std::string& results_path,
                                const std::string& dataset_path);

std::vector<ResultRecord> load_results(const std::string& path);

/// Derived per-item seed so parallel scheduling cannot reorder randomness.
long derive_item_seed(unsigned long long run_seed, const std::string& item_id);

}  // namespace vca
