#include "vca/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace vca {

namespace {

const std::map<char, char>& visual_map() {
    static const std::map<char, char> kMap = {
        {'o', '0'}, {'0', 'o'}, {'l', '1'}, {'1', 'l'}, {'a', '@'}, {'@', 'a'},
        {'e', '3'}, {'3', 'e'}, {'s', '$'}, {'$', 's'}, {'i', '!'}, {'!', 'i'},
    };
    return kMap;
}

const std::map<char, std::string>& keyboard_map() {
    static const std::map<char, std::string> kMap = {
        {'q', "wa"},   {'w', "qes"},  {'e', "wrd"},  {'r', "etf"},  {'t', "ryg"},
        {'y', "tuh"},  {'u', "yij"},  {'i', "uok"},  {'o', "ipl"},  {'p', "ol"},
        {'a', "qsz"},  {'s', "awdx"}, {'d', "sefc"}, {'f', "drgv"}, {'g', "fthb"},
        {'h', "gyjn"}, {'j', "hukm"}, {'k', "jil"},  {'l', "kop"},  {'z', "asx"},
        {'x', "zsdc"}, {'c', "xdfv"}, {'v', "cfgb"}, {'b', "vghn"}, {'n', "bhjm"},
        {'m', "njk"},
    };
    return kMap;
}

// Replace the alphanumeric core of a whitespace chunk, preserving any
// punctuation prefix/suffix ("apple," -> "pome,").
std::string replace_core(const std::string& chunk, const std::string& replacement) {
    size_t begin = 0, end = chunk.size();
    while (begin < end && !std::isalnum(static_cast<unsigned char>(chunk[begin]))) ++begin;
    while (end > begin && !std::isalnum(static_cast<unsigned char>(chunk[end - 1]))) --end;
    return chunk.substr(0, begin) + replacement + chunk.substr(end);
}

std::string text_with_replacement(const std::vector<std::string>& words, int index,
                                  const std::string& replacement_chunk) {
    std::vector<std::string> copy = words;
    copy[static_cast<size_t>(index)] = replacement_chunk;
    return join_words(copy);
}

std::string text_without_word(const std::vector<std::string>& words, int index) {
    std::vector<std::string> copy;
    copy.reserve(words.size() - 1);
    for (size_t i = 0; i < words.size(); ++i) {
        if (static_cast<int>(i) != index) copy.push_back(words[i]);
    }
    return join_words(copy);
}

struct AttackState {
    std::string original_text;
    Verdict original;
    std::string cur_text;
    double best_conf = 0.0;
    Verdict best_verdict;
    long iterations = 0;
    bool flipped = false;
    long seed = 0;
};

AttackState init_state(const AttackContext& ctx, const AttackConfig& cfg) {
    cfg.validate();
    AttackState st;
    st.original_text = surface_text(ctx.cem, ctx.item, cfg.surface);
    st.seed = static_cast<long>(cfg.rng_seed & 0x7fffffffffffffffULL);
    st.original = evaluate_surface(ctx, cfg.surface, st.original_text, st.seed);
    st.cur_text = st.original_text;
    st.best_conf = st.original.confidence;
    st.best_verdict = st.original;
    return st;
}

// Shared accept rule: the similarity gate plus a strict confidence decrease.
// A candidate whose extraction defaulted is rejected unless its answer
// flipped (a successful attack in its own right).
bool try_accept(const AttackContext& ctx, const AttackConfig& cfg, AttackState& st,
                const std::string& candidate) {
    if (candidate == st.cur_text) return false;
    if (ctx.scorer.score(st.original_text, candidate) < cfg.tau) return false;
    Verdict v = evaluate_surface(ctx, cfg.surface, candidate, st.seed);
    const bool flip = v.answer != st.original.answer;
    if (v.defaulted && !flip) return false;
    if (v.confidence >= st.best_conf && !(flip && v.defaulted)) return false;
    st.cur_text = candidate;
    st.best_conf = std::min(st.best_conf, v.confidence);
    st.best_verdict = v;
    st.flipped = flip;
    return true;
}

AttackOutcome finish(const AttackContext& ctx, const AttackConfig& cfg, const AttackState& st,
                     const std::string& attack_name) {
    AttackOutcome out;
    out.item_id = ctx.item.id;
    out.cem_name = ctx.cem.name();
    out.attack_name = attack_name;
    out.original = st.original;
    out.adversarial = st.best_verdict;
    out.iterations = st.iterations;
    out.original_text = st.original_text;
    out.adversarial_text = st.cur_text;
    out.surface = cfg.surface;
    out.flipped = st.flipped;
    return out;
}

std::vector<int> non_stop_word_indices(const std::vector<std::string>& words) {
    std::vector<int> out;
    for (size_t i = 0; i < words.size(); ++i) {
        const std::string core = word_core(words[i]);
        if (core.empty() || is_stop_word(core)) continue;
        out.push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace

void AttackConfig::validate() const {
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("attack: tau must be in (0, 1]");
    if (typo_char_prob < 0.0 || typo_char_prob > 1.0) {
        throw std::invalid_argument("attack: typo_char_prob must be in [0, 1]");
    }
    if (max_iters < 0 || n_syn < 1 || ssr_synonyms < 1 || neighbor_count < 1) {
        throw std::invalid_argument("attack: counts must be positive");
    }
}

std::string surface_text(const CemSpec& cem, const McqItem& item, Surface surface) {
    switch (surface) {
        case Surface::Query: return item.question;
        case Surface::SystemPrompt: return cem.system_template;
        case Surface::Demonstration:
            if (!cem.demonstration) {
                throw std::invalid_argument("attacked CEM has no demonstration");
            }
            return *cem.demonstration;
    }
    return item.question;
}

Verdict evaluate_surface(const AttackContext& ctx, Surface surface, const std::string& text,
                         long seed) {
    SurfaceOverrides overrides;
    switch (surface) {
        case Surface::Query: overrides.question = text; break;
        case Surface::SystemPrompt: overrides.system_prompt = text; break;
        case Surface::Demonstration: overrides.demonstration = text; break;
    }
    return elicit(ctx.cem, ctx.item, ctx.gateway, overrides, seed).verdict;
}

std::vector<TokenImportance> importance_scores(const AttackContext& ctx, Surface surface,
                                               const std::string& text, long seed) {
    const Verdict original = evaluate_surface(ctx, surface, text, seed);
    const auto words = split_words(text);
    std::vector<TokenImportance> scores;
    for (int idx : non_stop_word_indices(words)) {
        Verdict without =
            evaluate_surface(ctx, surface, text_without_word(words, idx), seed);
        scores.push_back({idx, words[static_cast<size_t>(idx)],
                          original.confidence - without.confidence});
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const TokenImportance& a, const TokenImportance& b) { return a.j > b.j; });
    return scores;
}

AttackOutcome vca_tf(const AttackContext& ctx, const AttackConfig& cfg) {
    if (!ctx.provider) throw std::invalid_argument("vca_tf: synonym provider unavailable");
    AttackState st = init_state(ctx, cfg);
    const auto ranked = importance_scores(ctx, cfg.surface, st.original_text, st.seed);
    auto words = split_words(st.original_text);

    for (const auto& entry : ranked) {
        st.iterations += 1;
        const std::string core = word_core(entry.word);
        auto candidates = ctx.provider->lookup(core, ctx.provider->pos_of(core));
        if (candidates.size() > static_cast<size_t>(cfg.n_syn)) {
            candidates.resize(static_cast<size_t>(cfg.n_syn));
        }

        // Keep the admissible substitution with the lowest confidence.
        std::string best_text;
        Verdict best_v;
        bool found = false;
        auto cur_words = split_words(st.cur_text);
        for (const auto& cand : candidates) {
            std::string chunk = replace_core(words[static_cast<size_t>(entry.word_index)], cand.word);
            std::string candidate = text_with_replacement(cur_words, entry.word_index, chunk);
            if (ctx.scorer.score(st.original_text, candidate) < cfg.tau) continue;
            Verdict v = evaluate_surface(ctx, cfg.surface, candidate, st.seed);
            const bool flip = v.answer != st.original.answer;
            if (v.defaulted && !flip) continue;
            double bar = found ? best_v.confidence : st.best_conf;
            if (v.confidence < bar) {
                best_text = candidate;
                best_v = v;
                found = true;
            }
        }
        if (found) {
            st.cur_text = best_text;
            st.best_conf = std::min(st.best_conf, best_v.confidence);
            st.best_verdict = best_v;
            st.flipped = best_v.answer != st.original.answer;
            if (st.flipped && cfg.stop_on_flip) break;
        }
    }
    return finish(ctx, cfg, st, "vca_tf");
}

AttackOutcome vca_tb(const AttackContext& ctx, const AttackConfig& cfg) {
    if (!ctx.provider) throw std::invalid_argument("vca_tb: synonym provider unavailable");
    AttackState st = init_state(ctx, cfg);
    const auto ranked = importance_scores(ctx, cfg.surface, st.original_text, st.seed);
    std::mt19937_64 rng(cfg.rng_seed);

    for (const auto& entry : ranked) {
        auto cur_words = split_words(st.cur_text);
        const std::string core = word_core(cur_words[static_cast<size_t>(entry.word_index)]);
        if (core.empty()) continue;

        std::string bugged = core;
        switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
            case 0: {  // insert space
                if (core.size() >= 2) {
                    size_t pos = std::uniform_int_distribution<size_t>(1, core.size() - 1)(rng);
                    bugged = core.substr(0, pos) + " " + core.substr(pos);
                }
                break;
            }
            case 1: {  // delete a character
                if (core.size() >= 2) {
                    size_t pos = std::uniform_int_distribution<size_t>(0, core.size() - 1)(rng);
                    bugged = core.substr(0, pos) + core.substr(pos + 1);
                }
                break;
            }
            case 2: {  // swap adjacent characters
                if (core.size() >= 2) {
                    size_t pos = std::uniform_int_distribution<size_t>(0, core.size() - 2)(rng);
                    bugged = core;
                    std::swap(bugged[pos], bugged[pos + 1]);
                }
                break;
            }
            case 3: {  // visually similar character
                std::vector<size_t> eligible;
                for (size_t i = 0; i < core.size(); ++i) {
                    if (visual_map().count(core[i])) eligible.push_back(i);
                }
                if (!eligible.empty()) {
                    size_t pick = eligible[std::uniform_int_distribution<size_t>(
                        0, eligible.size() - 1)(rng)];
                    bugged = core;
                    bugged[pick] = visual_map().at(core[pick]);
                }
                break;
            }
            case 4: {  // nearest-neighbour word
                auto nn = ctx.provider->neighbors(core, cfg.neighbor_count);
                if (!nn.empty()) {
                    bugged = nn[std::uniform_int_distribution<size_t>(0, nn.size() - 1)(rng)];
                }
                break;
            }
        }
        if (bugged == core) continue;  // degenerate bug: no iteration credit

        st.iterations += 1;
        std::string chunk =
            replace_core(cur_words[static_cast<size_t>(entry.word_index)], bugged);
        std::string candidate = text_with_replacement(cur_words, entry.word_index, chunk);
        if (try_accept(ctx, cfg, st, candidate) && st.flipped && cfg.stop_on_flip) break;
    }
    return finish(ctx, cfg, st, "vca_tb");
}

AttackOutcome typos_attack(const AttackContext& ctx, const AttackConfig& cfg) {
    AttackState st = init_state(ctx, cfg);
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        st.iterations += 1;
        std::string candidate;
        candidate.reserve(st.cur_text.size());
        for (size_t i = 0; i < st.cur_text.size(); ++i) {
            char c = st.cur_text[i];
            if (!std::isalnum(static_cast<unsigned char>(c)) ||
                unit(rng) >= cfg.typo_char_prob) {
                candidate.push_back(c);
                continue;
            }
            switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
                case 0: {  // nearby keyboard substitution
                    char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                    auto it = keyboard_map().find(lower);
                    if (it != keyboard_map().end()) {
                        const std::string& nearby = it->second;
                        candidate.push_back(nearby[std::uniform_int_distribution<size_t>(
                            0, nearby.size() - 1)(rng)]);
                    } else {
                        candidate.push_back(c);
                    }
                    break;
                }
                case 1:  // deletion
                    break;
                case 2: {  // adjacent swap
                    if (i + 1 < st.cur_text.size() &&
                        std::isalnum(static_cast<unsigned char>(st.cur_text[i + 1]))) {
                        candidate.push_back(st.cur_text[i + 1]);
                        candidate.push_back(c);
                        ++i;
                    } else {
                        candidate.push_back(c);
                    }
                    break;
                }
            }
        }
        if (try_accept(ctx, cfg, st, candidate) && st.flipped && cfg.stop_on_flip) break;
    }
    return finish(ctx, cfg, st, "typos");
}

AttackOutcome ssr_attack(const AttackContext& ctx, const AttackConfig& cfg) {
    if (!ctx.provider) throw std::invalid_argument("ssr_attack: synonym provider unavailable");
    AttackState st = init_state(ctx, cfg);
    std::mt19937_64 rng(cfg.rng_seed);

    // Entries carry stable ids so removals and swaps do not disturb the
    // single pass over the original token sequence.
    struct Entry {
        int id;
        std::string word;
    };
    auto words = split_words(st.original_text);
    std::vector<Entry> entries;
    for (size_t i = 0; i < words.size(); ++i) {
        entries.push_back({static_cast<int>(i), words[i]});
    }
    const std::vector<int> visit = non_stop_word_indices(words);

    auto render = [](const std::vector<Entry>& es) {
        std::vector<std::string> ws;
        ws.reserve(es.size());
        for (const auto& e : es) ws.push_back(e.word);
        return join_words(ws);
    };

    for (int id : visit) {
        auto pos_it = std::find_if(entries.begin(), entries.end(),
                                   [id](const Entry& e) { return e.id == id; });
        if (pos_it == entries.end()) continue;
        const size_t pos = static_cast<size_t>(pos_it - entries.begin());
        const std::string core = word_core(entries[pos].word);

        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0: {  // Sub: best drop among the top synonyms
                auto cands = ctx.provider->lookup(core, std::nullopt);
                if (cands.size() > static_cast<size_t>(cfg.ssr_synonyms)) {
                    cands.resize(static_cast<size_t>(cfg.ssr_synonyms));
                }
                if (cands.empty()) continue;
                st.iterations += 1;
                std::string best_word;
                Verdict best_v;
                bool found = false;
                for (const auto& cand : cands) {
                    auto copy = entries;
                    copy[pos].word = replace_core(entries[pos].word, cand.word);
                    std::string candidate = render(copy);
                    if (ctx.scorer.score(st.original_text, candidate) < cfg.tau) continue;
                    Verdict v = evaluate_surface(ctx, cfg.surface, candidate, st.seed);
                    const bool flip = v.answer != st.original.answer;
                    if (v.defaulted && !flip) continue;
                    double bar = found ? best_v.confidence : st.best_conf;
                    if (v.confidence < bar) {
                        best_word = copy[pos].word;
                        best_v = v;
                        found = true;
                    }
                }
                if (found) {
                    entries[pos].word = best_word;
                    st.cur_text = render(entries);
                    st.best_conf = std::min(st.best_conf, best_v.confidence);
                    st.best_verdict = best_v;
                    st.flipped = best_v.answer != st.original.answer;
                }
                break;
            }
            case 1: {  // Swap with the adjacent token
                if (entries.size() < 2) continue;
                size_t other = pos + 1 < entries.size() ? pos + 1 : pos - 1;
                auto copy = entries;
                std::swap(copy[pos], copy[other]);
                st.iterations += 1;
                if (try_accept(ctx, cfg, st, render(copy))) entries = copy;
                break;
            }
            case 2: {  // Remove the token
                if (entries.size() < 2) continue;
                auto copy = entries;
                copy.erase(copy.begin() + static_cast<long>(pos));
                st.iterations += 1;
                std::string candidate = render(copy);
                if (try_accept(ctx, cfg, st, candidate)) entries = copy;
                break;
            }
        }
        if (st.flipped && cfg.stop_on_flip) break;
    }
    return finish(ctx, cfg, st, "ssr");
}

double fallback_similarity(const std::string& original, const std::string& candidate) {
    return trigram_cosine(original, candidate);
}

const std::vector<std::string>& attack_names() {
    static const std::vector<std::string> kNames = {"vca_tf", "vca_tb", "typos", "ssr"};
    return kNames;
}

AttackOutcome run_attack(const std::string& attack_name, const AttackContext& ctx,
                         const AttackConfig& cfg) {
    if (attack_name == "vca_tf") return vca_tf(ctx, cfg);
    if (attack_name == "vca_tb") return vca_tb(ctx, cfg);
    if (attack_name == "typos") return typos_attack(ctx, cfg);
    if (attack_name == "ssr") return ssr_attack(ctx, cfg);
    throw std::invalid_argument("unknown attack: " + attack_name);
}

}  // namespace vca
