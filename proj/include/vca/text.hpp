#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace vca {

/// Lowercase a copy of s (ASCII).
std::string to_lower(std::string s);

/// Lowercase, split on non-alphanumeric characters, drop 1-char fragments.
/// This is the shared lexical tokenization used by the mock model, the
/// attack loops and the perplexity filter.
std::vector<std::string> tokenize(const std::string& text);

/// The fixed 50-word stop list shipped with the harness.
const std::unordered_set<std::string>& stop_words();

bool is_stop_word(const std::string& lower_token);

/// True when the token is digits only (numerals are never treated as OOV).
bool is_numeric_token(const std::string& token);

/// Whitespace-delimited chunks of the raw text, for word-level edits that
/// must reconstruct the surrounding text. Punctuation stays attached.
std::vector<std::string> split_words(const std::string& text);

std::string join_words(const std::vector<std::string>& words);

/// Lowercased alphanumeric core of a whitespace chunk ("Apple," -> "apple").
std::string word_core(const std::string& word);

/// Scoring contract for the semantic-similarity gate. score(x, x) = 1 and
/// the score is symmetric.
class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    virtual double score(const std::string& original, const std::string& candidate) const = 0;
};

/// Cosine similarity of character-trigram count vectors. Offline stand-in
/// for an encoder-based scorer; deterministic. Two empty strings score 1.
double trigram_cosine(const std::string& a, const std::string& b);

class TrigramSimilarity final : public SimilarityScorer {
public:
    double score(const std::string& original, const std::string& candidate) const override {
        return trigram_cosine(original, candidate);
    }
};

}  // namespace vca
