#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vca/core.hpp"
#include "vca/elicit.hpp"
#include "vca/gateway.hpp"
#include "vca/synonym.hpp"
#include "vca/text.hpp"

namespace vca {

struct AttackConfig {
    Surface surface = Surface::Query;
    double tau = 0.8;             // similarity gate threshold
    int max_iters = 25;           // Typos iteration cap
    int n_syn = 50;               // VCA-TF candidate synonyms per token
    int ssr_synonyms = 5;         // SSR substitution candidates per token
    double typo_char_prob = 0.1;  // per-character perturbation probability
    int neighbor_count = 5;       // VCA-TB nearest-neighbour pool size
    bool stop_on_flip = true;
    unsigned long long rng_seed = 0;

    /// tau in (0, 1], probabilities in [0, 1], positive counts.
    void validate() const;
};

struct TokenImportance {
    int word_index = 0;     // position in split_words(surface_text)
    std::string word;
    double j = 0.0;         // C_original - C_without_token
};

/// Everything a perturbation attack needs to evaluate candidate texts.
struct AttackContext {
    const CemSpec& cem;
    const McqItem& item;
    Gateway& gateway;
    const SimilarityScorer& scorer;
    const SynonymProvider* provider = nullptr;  // TF/TB/SSR only
};

/// The text currently on the attacked surface (question text for the query
/// surface). Throws when the demonstration surface is attacked without one.
std::string surface_text(const CemSpec& cem, const McqItem& item, Surface surface);

/// Re-elicit with `text` substituted on `surface`. Other surfaces keep their
/// defaults.
Verdict evaluate_surface(const AttackContext& ctx, Surface surface, const std::string& text,
                         long seed);

/// Deletion-based importance score for every non-stop-word token, sorted by
/// descending score (stable, ties keep original order).
std::vector<TokenImportance> importance_scores(const AttackContext& ctx, Surface surface,
                                               const std::string& text, long seed);

/// VCA-TF: visit tokens in importance order, try up to n_syn POS-compatible
/// synonyms each, keep the admissible substitution with the lowest
/// confidence. iterations counts token visits.
AttackOutcome vca_tf(const AttackContext& ctx, const AttackConfig& cfg);

/// VCA-TB: one randomly selected bug per visited token from {insert-space,
/// delete-char, swap-adjacent, visually-similar-char, nearest-neighbour
/// word}. Degenerate bugs (output equals input) earn no iteration credit.
AttackOutcome vca_tb(const AttackContext& ctx, const AttackConfig& cfg);

/// Typos: up to max_iters rounds, each perturbing ~typo_char_prob of the
/// characters with keyboard substitutions, deletions and adjacent swaps.
/// Cumulative: each accepted round perturbs the last accepted text.
AttackOutcome typos_attack(const AttackContext& ctx, const AttackConfig& cfg);

/// SubSwapRemove: one pass over non-stop tokens; per token one of
/// {Sub, Swap, Remove} uniformly. Sub tries ssr_synonyms top synonyms and
/// keeps the best drop.
AttackOutcome ssr_attack(const AttackContext& ctx, const AttackConfig& cfg);

/// Offline similarity stand-in, exposed with the spec's operation name.
double fallback_similarity(const std::string& original, const std::string& candidate);

AttackOutcome run_attack(const std::string& attack_name, const AttackContext& ctx,
                         const AttackConfig& cfg);

const std::vector<std::string>& attack_names();  // vca_tf vca_tb typos ssr

}  // namespace vca
