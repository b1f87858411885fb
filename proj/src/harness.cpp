#include "vca/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vca/hash.hpp"
#include "vca/http_client.hpp"
#include "vca/text.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vca {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_answer(const json& answer, const std::vector<std::string>& options, int line_no) {
    if (answer.is_boolean()) {
        return answer.get<bool>() ? 0 : 1;
    }
    if (answer.is_number_integer()) {
        return answer.get<int>();
    }
    if (answer.is_string()) {
        const std::string s = trim(answer.get<std::string>());
        if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z') return s[0] - 'A';
        for (size_t i = 0; i < options.size(); ++i) {
            if (options[i] == s) return static_cast<int>(i);
        }
    }
    throw std::runtime_error("line " + std::to_string(line_no) + ": unsupported answer value");
}

McqItem item_from_json(const json& j, int line_no) {
    McqItem item;
    try {
        item.id = j.at("id").get<std::string>();
        item.question = j.at("question").get<std::string>();
        if (j.contains("options")) {
            item.options = j.at("options").get<std::vector<std::string>>();
        }
        const json& answer = j.at("answer");
        if (answer.is_boolean() && item.options.empty()) {
            item.options = {"True", "False"};
        }
        item.gold_index = parse_answer(answer, item.options, line_no);
    } catch (const json::exception& e) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
        item.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    return item;
}

std::vector<std::string> parse_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') {
            if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else {
                in_quotes = !in_quotes;
            }
        } else if (c == ',' && !in_quotes) {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

json verdict_to_json(const Verdict& v) {
    json j;
    j["answer"] = v.has_answer() ? std::string(1, v.answer) : std::string();
    j["confidence"] = v.confidence;
    j["defaulted"] = v.defaulted;
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    const std::string a = j.value("answer", std::string());
    v.answer = a.empty() ? kNoAnswer : a[0];
    v.confidence = j.value("confidence", 0.0);
    v.defaulted = j.value("defaulted", false);
    return v;
}

}  // namespace

std::string RunConfig::to_json() const {
    json j;
    j["model"] = model;
    j["endpoint"] = endpoint;
    j["api_key_env"] = api_key_env;
    j["dataset"] = dataset_path;
    j["cem"] = cem;
    j["attack"] = attack;
    j["surface"] = surface;
    j["defense"] = defense;
    j["calibration"] = calibration_path;
    j["trigger"] = trigger_path;
    j["synonyms"] = synonyms_path;
    j["embeddings"] = embeddings_path;
    j["templates"] = templates_dir;
    j["seed"] = seed;
    j["sample"] = sample;
    j["tau"] = tau;
    j["sc_samples"] = sc_samples;
    j["typos_max_iters"] = typos_max_iters;
    j["n_syn"] = n_syn;
    j["stop_on_flip"] = stop_on_flip;
    return j.dump();  // nlohmann::json orders keys, so the dump is canonical
}

std::string RunConfig::config_hash() const { return hash_hex(fnv1a64(to_json())); }

std::vector<McqItem> load_dataset(const std::string& path, DatasetFormat format) {
    if (format == DatasetFormat::Auto) {
        format = path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? DatasetFormat::Csv
                                                                            : DatasetFormat::Jsonl;
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);

    std::vector<McqItem> items;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;

    if (format == DatasetFormat::Jsonl) {
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
            }
            McqItem item = item_from_json(j, line_no);
            if (!seen_ids.insert(item.id).second) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate id '" +
                                         item.id + "'");
            }
            items.push_back(std::move(item));
        }
    } else {
        if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
        ++line_no;  // header
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            auto cells = parse_csv_row(line);
            if (cells.size() < 4) {
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": expected id,question,options,answer");
            }
            json j;
            j["id"] = trim(cells[0]);
            j["question"] = cells[1];
            json options = json::array();
            std::stringstream opts(cells[2]);
            std::string opt;
            while (std::getline(opts, opt, '|')) options.push_back(opt);
            j["options"] = options;
            const std::string ans = trim(cells[3]);
            if (ans == "true" || ans == "false") {
                j["answer"] = ans == "true";
                if (options.empty()) j.erase("options");
            } else if (!ans.empty() &&
                       std::all_of(ans.begin(), ans.end(),
                                   [](unsigned char c) { return std::isdigit(c); })) {
                j["answer"] = std::stoi(ans);
            } else {
                j["answer"] = ans;
            }
            McqItem item = item_from_json(j, line_no);
            if (!seen_ids.insert(item.id).second) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate id '" +
                                         item.id + "'");
            }
            items.push_back(std::move(item));
        }
    }
    return items;
}

std::string ResultRecord::to_json_line() const {
    json j;
    j["item_id"] = item_id;
    j["cem"] = cem;
    j["attack"] = attack;
    j["surface"] = to_string(surface);
    j["original"] = verdict_to_json(original);
    j["adversarial"] = verdict_to_json(adversarial);
    j["iterations"] = iterations;
    j["original_text"] = original_text;
    j["adversarial_text"] = adversarial_text;
    j["flipped"] = flipped;
    if (defense_log_ppl) j["defense_log_ppl"] = *defense_log_ppl;
    if (defense_filtered) j["defense_filtered"] = *defense_filtered;
    if (error) j["error"] = *error;
    j["config_hash"] = config_hash;
    return j.dump();
}

ResultRecord ResultRecord::from_json_line(const std::string& line) {
    json j = json::parse(line);
    ResultRecord r;
    r.item_id = j.at("item_id").get<std::string>();
    r.cem = j.value("cem", std::string());
    r.attack = j.value("attack", std::string());
    r.surface = surface_from_string(j.value("surface", std::string("query")));
    r.original = verdict_from_json(j.at("original"));
    r.adversarial = verdict_from_json(j.at("adversarial"));
    r.iterations = j.value("iterations", 0L);
    r.original_text = j.value("original_text", std::string());
    r.adversarial_text = j.value("adversarial_text", std::string());
    r.flipped = j.value("flipped", false);
    if (j.contains("defense_log_ppl")) r.defense_log_ppl = j["defense_log_ppl"].get<double>();
    if (j.contains("defense_filtered")) r.defense_filtered = j["defense_filtered"].get<bool>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    r.config_hash = j.value("config_hash", std::string());
    return r;
}

std::vector<ResultRecord> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results: " + path);
    std::vector<ResultRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(ResultRecord::from_json_line(line));
    }
    return out;
}

long derive_item_seed(unsigned long long run_seed, const std::string& item_id) {
    return static_cast<long>(hash_combine(fnv1a64(item_id), run_seed) & 0x7fffffffffffffffULL);
}

namespace {

struct RunState {
    RunConfig cfg;
    std::vector<McqItem> items;
    std::shared_ptr<MockModel> mock;  // set when model == "mock"
    std::unique_ptr<Gateway> gateway;
    std::unique_ptr<SynonymProvider> provider;
    TrigramSimilarity scorer;
    std::optional<TriggerArtifact> trigger;
    std::optional<double> ppl_threshold;
    std::unique_ptr<StubRephraser> stub_rephraser;
    std::unique_ptr<LlmRephraser> llm_rephraser;
    CemSpec cem;
};

std::vector<McqItem> sample_items(std::vector<McqItem> items, int sample,
                                  unsigned long long seed) {
    if (sample <= 0 || sample >= static_cast<int>(items.size())) return items;
    std::mt19937_64 rng(fnv1a64("sample", seed));
    std::shuffle(items.begin(), items.end(), rng);
    items.resize(static_cast<size_t>(sample));
    return items;
}

Rephraser& rephraser_for(RunState& st) {
    if (st.stub_rephraser) return *st.stub_rephraser;
    return *st.llm_rephraser;
}

RunState prepare(const RunConfig& cfg) {
    RunState st;
    st.cfg = cfg;
    st.items = sample_items(load_dataset(cfg.dataset_path), cfg.sample, cfg.seed);
    if (st.items.empty()) throw std::runtime_error("dataset is empty");

    if (cfg.model == "mock") {
        st.mock = std::make_shared<MockModel>(st.items);
        st.gateway = std::make_unique<Gateway>(st.mock, cfg.caching);
    } else {
        st.gateway = std::make_unique<Gateway>(
            std::make_shared<HttpChatClient>(cfg.model, cfg.endpoint, cfg.api_key_env),
            cfg.caching);
    }

    if (!cfg.embeddings_path.empty()) {
        st.provider = std::make_unique<EmbeddingSynonymProvider>(cfg.embeddings_path);
    } else if (!cfg.synonyms_path.empty()) {
        st.provider = std::make_unique<StaticSynonymProvider>(
            StaticSynonymProvider::from_json_file(cfg.synonyms_path));
    } else {
        st.provider = std::make_unique<StaticSynonymProvider>();
    }

    st.cem = CemSpec::make_from_dir(cem_from_name(cfg.cem), cfg.templates_dir);
    st.cem.sample_count = cfg.sc_samples;

    if (cfg.attack == "trigger") {
        if (cfg.trigger_path.empty()) {
            throw std::runtime_error("attack=trigger requires --trigger <file>");
        }
        st.trigger = TriggerArtifact::load(cfg.trigger_path);
    }

    if (cfg.defense == "paraphrase") {
        if (cfg.model == "mock") {
            st.stub_rephraser = std::make_unique<StubRephraser>();
        } else {
            st.llm_rephraser = std::make_unique<LlmRephraser>(*st.gateway);
        }
    }

    if (cfg.defense == "ppl") {
        auto calibration = cfg.calibration_path.empty()
                               ? st.items
                               : load_dataset(cfg.calibration_path);
        std::vector<std::string> benign;
        for (const auto& item : calibration) {
            benign.push_back(build_prompt(st.cem, item).full_text());
        }
        Gateway* gw = st.gateway.get();
        LogprobSource source = [gw](const std::string& text) {
            ChatRequest req;
            req.messages = {{"user", text}};
            req.want_logprobs = true;
            auto resp = gw->complete(req);
            if (!resp.token_logprobs) {
                throw std::runtime_error("ppl defense: model does not return logprobs");
            }
            return *resp.token_logprobs;
        };
        st.ppl_threshold = calibrate_ppl_threshold(benign, source);
    }
    return st;
}

AttackConfig attack_config_for(const RunState& st, const McqItem& item) {
    AttackConfig acfg;
    acfg.surface = surface_from_string(st.cfg.surface);
    acfg.tau = st.cfg.tau;
    acfg.max_iters = st.cfg.typos_max_iters;
    acfg.n_syn = st.cfg.n_syn;
    acfg.stop_on_flip = st.cfg.stop_on_flip;
    acfg.rng_seed = static_cast<unsigned long long>(derive_item_seed(st.cfg.seed, item.id));
    return acfg;
}

ResultRecord process_item(RunState& st, const McqItem& item) {
    ResultRecord rec;
    rec.item_id = item.id;
    rec.cem = st.cfg.cem;
    rec.attack = st.cfg.attack;
    rec.surface = surface_from_string(st.cfg.surface);
    rec.config_hash = st.cfg.config_hash();

    const long seed = derive_item_seed(st.cfg.seed, item.id);
    try {
        rec.original = elicit(st.cem, item, *st.gateway, {}, seed).verdict;

        if (st.cfg.attack == "none") {
            rec.adversarial = rec.original;
            rec.original_text = item.question;
            rec.adversarial_text = item.question;
        } else if (st.cfg.attack == "trigger") {
            SurfaceOverrides overrides;
            overrides.trigger_suffix = st.trigger->payload_text();
            rec.adversarial = elicit(st.cem, item, *st.gateway, overrides, seed).verdict;
            rec.original_text = st.cem.system_template;
            rec.adversarial_text = st.cem.system_template + " " + *overrides.trigger_suffix;
            rec.surface = Surface::SystemPrompt;
            rec.iterations = 1;
            rec.flipped = rec.adversarial.answer != rec.original.answer;
        } else {
            AttackContext ctx{st.cem, item, *st.gateway, st.scorer, st.provider.get()};
            AttackOutcome outcome = run_attack(st.cfg.attack, ctx, attack_config_for(st, item));
            rec.adversarial = outcome.adversarial;
            rec.iterations = outcome.iterations;
            rec.original_text = outcome.original_text;
            rec.adversarial_text = outcome.adversarial_text;
            rec.flipped = outcome.flipped;
        }

        // Defenses re-evaluate (or gate) the adversarial configuration.
        if (st.cfg.defense == "ppl" && st.ppl_threshold) {
            SurfaceOverrides adv;
            if (st.cfg.attack == "trigger") {
                adv.trigger_suffix = st.trigger->payload_text();
            } else if (st.cfg.attack != "none") {
                switch (rec.surface) {
                    case Surface::Query: adv.question = rec.adversarial_text; break;
                    case Surface::SystemPrompt: adv.system_prompt = rec.adversarial_text; break;
                    case Surface::Demonstration: adv.demonstration = rec.adversarial_text; break;
                }
            }
            PromptBundle bundle = build_prompt(st.cem, item, adv);
            Gateway* gw = st.gateway.get();
            LogprobSource source = [gw](const std::string& text) {
                ChatRequest req;
                req.messages = {{"user", text}};
                req.want_logprobs = true;
                auto resp = gw->complete(req);
                if (!resp.token_logprobs) {
                    throw std::runtime_error("ppl defense: model does not return logprobs");
                }
                return *resp.token_logprobs;
            };
            PerplexityVerdict ppl =
                evaluate_perplexity(bundle.full_text(), *st.ppl_threshold, source);
            rec.defense_log_ppl = ppl.log_ppl;
            rec.defense_filtered = ppl.filtered;
        } else if (st.cfg.defense == "smooth") {
            SmoothConfig scfg;
            scfg.rng_seed = static_cast<unsigned long long>(seed);
            SurfaceOverrides adv;
            if (st.cfg.attack == "trigger") {
                adv.trigger_suffix = st.trigger->payload_text();
            } else if (st.cfg.attack != "none") {
                switch (rec.surface) {
                    case Surface::Query: adv.question = rec.adversarial_text; break;
                    case Surface::SystemPrompt: adv.system_prompt = rec.adversarial_text; break;
                    case Surface::Demonstration: adv.demonstration = rec.adversarial_text; break;
                }
            }
            rec.adversarial = smoothllm_confidence(st.cem, item, *st.gateway, scfg, adv, seed).verdict;
        } else if (st.cfg.defense == "paraphrase") {
            SurfaceOverrides adv;
            std::string system = st.cem.system_template;
            if (st.cfg.attack == "trigger") {
                system += " " + st.trigger->payload_text();
            } else if (st.cfg.attack != "none" && rec.surface == Surface::SystemPrompt) {
                system = rec.adversarial_text;
            } else if (st.cfg.attack != "none") {
                switch (rec.surface) {
                    case Surface::Query: adv.question = rec.adversarial_text; break;
                    case Surface::Demonstration: adv.demonstration = rec.adversarial_text; break;
                    default: break;
                }
            }
            try {
                auto para = paraphrase_defense(system, rephraser_for(st));
                adv.system_prompt = para.text;
                rec.adversarial = elicit(st.cem, item, *st.gateway, adv, seed).verdict;
            } catch (const DefenseUnavailableError& e) {
                rec.error = e.what();  // proceed undefended, recorded
            }
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    return rec;
}

// Complete lines only; a partial tail line (crash mid-write) is dropped so
// appends always start at a record boundary.
std::pair<std::vector<std::string>, bool> read_complete_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<std::string> lines;
    if (!in) return {lines, false};
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    size_t pos = 0;
    bool truncated_tail = false;
    while (pos < content.size()) {
        size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) {
            truncated_tail = true;
            break;
        }
        std::string line = content.substr(pos, nl - pos);
        if (!trim(line).empty()) lines.push_back(line);
        pos = nl + 1;
    }
    return {lines, truncated_tail};
}

}  // namespace

RunSummary run_attack_suite(const RunConfig& cfg) {
    if (cfg.out_path.empty()) throw std::runtime_error("run_attack_suite: --out is required");
    RunState st = prepare(cfg);

    RunSummary summary;
    summary.items_total = static_cast<int>(st.items.size());
    summary.results_path = cfg.out_path;

    // Resume: keep complete lines of a previous run, skip their ids.
    auto [existing, had_partial_tail] = read_complete_lines(cfg.out_path);
    std::set<std::string> done;
    for (const auto& line : existing) {
        ResultRecord r = ResultRecord::from_json_line(line);
        if (r.config_hash != cfg.config_hash()) {
            throw std::runtime_error("out file was produced by a different config; refusing to resume");
        }
        done.insert(r.item_id);
    }
    if (had_partial_tail) {
        std::ofstream rewrite(cfg.out_path, std::ios::trunc);
        for (const auto& line : existing) rewrite << line << "\n";
    }
    summary.items_skipped = static_cast<int>(done.size());

    std::ofstream out(cfg.out_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write results: " + cfg.out_path);

    const long n = static_cast<long>(st.items.size());
#ifdef _OPENMP
    const int threads = std::max(1, cfg.concurrency);
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(threads)
#endif
    for (long i = 0; i < n; ++i) {
        const McqItem& item = st.items[static_cast<size_t>(i)];
        std::string line;
        bool failed = false;
        if (!done.count(item.id)) {
            ResultRecord rec = process_item(st, item);
            failed = rec.error.has_value();
            line = rec.to_json_line();
        }
#ifdef _OPENMP
#pragma omp ordered
#endif
        {
            if (!line.empty()) {
                out << line << "\n";
                out.flush();
                ++summary.items_run;
                if (failed) ++summary.items_failed;
            }
        }
    }
    out.close();

    // Sidecar metadata; the results file itself stays byte-reproducible.
    {
        json meta;
        meta["config"] = json::parse(cfg.to_json());
        meta["config_hash"] = cfg.config_hash();
        meta["timestamp"] = static_cast<long>(
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count());
        std::vector<std::string> ids;
        for (const auto& item : st.items) ids.push_back(item.id);
        meta["item_ids"] = ids;
        std::ofstream meta_out(cfg.out_path + ".meta.json");
        meta_out << meta.dump(2) << "\n";
    }

    summary.metrics = report_from_file(cfg.out_path, cfg.dataset_path);
    return summary;
}

AttackTableRow report_from_file(const std::string& results_path,
                                const std::string& dataset_path) {
    const auto records = load_results(results_path);
    const auto items = load_dataset(dataset_path);
    std::unordered_map<std::string, char> gold;
    for (const auto& item : items) gold[item.id] = option_letter(item.gold_index);

    std::vector<AttackOutcome> outcomes;
    for (const auto& r : records) {
        if (r.error) continue;
        AttackOutcome o;
        o.item_id = r.item_id;
        o.cem_name = r.cem;
        o.attack_name = r.attack;
        o.original = r.original;
        o.adversarial = r.adversarial;
        o.iterations = r.iterations;
        o.original_text = r.original_text;
        o.adversarial_text = r.adversarial_text;
        o.surface = r.surface;
        o.flipped = r.flipped;
        outcomes.push_back(std::move(o));
    }
    if (outcomes.empty()) throw std::runtime_error("no usable records in " + results_path);
    return attack_metrics(outcomes, gold);
}

}  // namespace vca
