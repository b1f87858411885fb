#include "vca/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace vca {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            if (cur.size() > 1) out.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() > 1) out.push_back(cur);
    return out;
}

const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> kStopWords = {
        "a",    "an",   "the",  "and",  "or",    "but",  "if",   "then",
        "is",   "are",  "was",  "were", "be",    "been", "being", "to",
        "of",   "in",   "on",   "at",   "by",    "for",  "with", "as",
        "it",   "its",  "this", "that", "these", "those", "there", "here",
        "he",   "she",  "they", "we",   "you",   "i",    "do",   "does",
        "did",  "not",  "no",   "so",   "such",  "from", "into", "than",
        "which", "what",
    };
    return kStopWords;
}

bool is_stop_word(const std::string& lower_token) {
    return stop_words().count(lower_token) > 0;
}

bool is_numeric_token(const std::string& token) {
    return !token.empty() &&
           std::all_of(token.begin(), token.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

std::string word_core(const std::string& word) {
    std::string out;
    for (unsigned char c : word) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

double trigram_cosine(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 1.0;

    auto grams = [](const std::string& s) {
        std::unordered_map<std::string, int> counts;
        if (s.empty()) return counts;
        if (s.size() < 3) {
            counts[s] = 1;
            return counts;
        }
        for (size_t i = 0; i + 3 <= s.size(); ++i) {
            counts[s.substr(i, 3)] += 1;
        }
        return counts;
    };

    auto ca = grams(a);
    auto cb = grams(b);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, n] : ca) {
        na += static_cast<double>(n) * n;
        auto it = cb.find(g);
        if (it != cb.end()) dot += static_cast<double>(n) * it->second;
    }
    for (const auto& [g, n] : cb) nb += static_cast<double>(n) * n;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace vca
