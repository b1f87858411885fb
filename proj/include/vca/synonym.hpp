#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace vca {

struct SynonymEntry {
    std::string word;
    std::string pos;  // coarse tag: n / v / adj / adv, empty = unknown
};

/// Ranked synonym lookup. Implementations never return the input token and
/// must be safe for concurrent reads.
class SynonymProvider {
public:
    virtual ~SynonymProvider() = default;
    virtual std::vector<SynonymEntry> lookup(const std::string& token,
                                             const std::optional<std::string>& pos_filter) const = 0;
    /// Coarse tag of the token itself when the provider knows it.
    virtual std::optional<std::string> pos_of(const std::string& token) const = 0;
    /// Nearest-neighbour words for VCA-TB's word-substitution bug.
    virtual std::vector<std::string> neighbors(const std::string& token, int count) const = 0;
};

/// Static table provider: token -> [{word, pos}]. Ships with a small
/// built-in table so attacks run with no external resources; a JSON file of
/// the same shape can replace or extend it.
class StaticSynonymProvider final : public SynonymProvider {
public:
    StaticSynonymProvider();  // built-in table
    explicit StaticSynonymProvider(
        std::unordered_map<std::string, std::vector<SynonymEntry>> table);

    static StaticSynonymProvider from_json_file(const std::string& path);
    static StaticSynonymProvider from_json_text(const std::string& json_text);

    std::vector<SynonymEntry> lookup(const std::string& token,
                                     const std::optional<std::string>& pos_filter) const override;
    std::optional<std::string> pos_of(const std::string& token) const override;
    std::vector<std::string> neighbors(const std::string& token, int count) const override;

private:
    std::unordered_map<std::string, std::vector<SynonymEntry>> table_;
};

/// Word-vector provider. File format: one token per line, token followed by
/// whitespace-separated floats. Synonyms/neighbours are nearest tokens by
/// cosine similarity; no POS information.
class EmbeddingSynonymProvider final : public SynonymProvider {
public:
    explicit EmbeddingSynonymProvider(const std::string& path);

    std::vector<SynonymEntry> lookup(const std::string& token,
                                     const std::optional<std::string>& pos_filter) const override;
    std::optional<std::string> pos_of(const std::string& token) const override;
    std::vector<std::string> neighbors(const std::string& token, int count) const override;

    size_t vocabulary_size() const { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::vector<std::vector<float>> vectors_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace vca
