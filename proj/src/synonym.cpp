#include "vca/synonym.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vca/text.hpp"

namespace vca {

namespace {

// Small curated table with coarse POS tags. Enough for offline runs and the
// test fixtures; real experiments load a bigger JSON table or embeddings.
std::unordered_map<std::string, std::vector<SynonymEntry>> builtin_table() {
    return {
        {"big", {{"large", "adj"}, {"huge", "adj"}, {"great", "adj"}}},
        {"large", {{"big", "adj"}, {"huge", "adj"}, {"vast", "adj"}}},
        {"small", {{"little", "adj"}, {"tiny", "adj"}, {"minor", "adj"}}},
        {"fast", {{"quick", "adj"}, {"rapid", "adj"}, {"swift", "adj"}}},
        {"slow", {{"sluggish", "adj"}, {"gradual", "adj"}}},
        {"good", {{"fine", "adj"}, {"decent", "adj"}, {"solid", "adj"}}},
        {"bad", {{"poor", "adj"}, {"awful", "adj"}, {"terrible", "adj"}}},
        {"happy", {{"glad", "adj"}, {"cheerful", "adj"}, {"joyful", "adj"}}},
        {"sad", {{"unhappy", "adj"}, {"gloomy", "adj"}}},
        {"old", {{"ancient", "adj"}, {"aged", "adj"}}},
        {"new", {{"fresh", "adj"}, {"recent", "adj"}, {"modern", "adj"}}},
        {"make", {{"build", "v"}, {"create", "v"}, {"produce", "v"}}},
        {"get", {{"obtain", "v"}, {"acquire", "v"}, {"receive", "v"}}},
        {"use", {{"employ", "v"}, {"apply", "v"}, {"utilize", "v"}}},
        {"show", {{"display", "v"}, {"reveal", "v"}, {"present", "v"}}},
        {"find", {{"locate", "v"}, {"discover", "v"}, {"spot", "v"}}},
        {"say", {{"state", "v"}, {"mention", "v"}, {"declare", "v"}}},
        {"ask", {{"question", "v"}, {"inquire", "v"}}},
        {"eat", {{"consume", "v"}, {"devour", "v"}}},
        {"buy", {{"purchase", "v"}, {"acquire", "v"}}},
        {"answer", {{"reply", "n"}, {"response", "n"}}},
        {"question", {{"query", "n"}, {"inquiry", "n"}}},
        {"car", {{"automobile", "n"}, {"vehicle", "n"}}},
        {"road", {{"street", "n"}, {"route", "n"}, {"path", "n"}}},
        {"house", {{"home", "n"}, {"dwelling", "n"}}},
        {"dog", {{"hound", "n"}, {"canine", "n"}}},
        {"cat", {{"feline", "n"}, {"kitty", "n"}}},
        {"doctor", {{"physician", "n"}, {"clinician", "n"}}},
        {"illness", {{"sickness", "n"}, {"disease", "n"}, {"ailment", "n"}}},
        {"medicine", {{"drug", "n"}, {"remedy", "n"}}},
        {"money", {{"cash", "n"}, {"currency", "n"}, {"funds", "n"}}},
        {"work", {{"labor", "n"}, {"toil", "n"}, {"job", "n"}}},
        {"world", {{"globe", "n"}, {"earth", "n"}}},
        {"water", {{"liquid", "n"}, {"fluid", "n"}}},
        {"food", {{"nourishment", "n"}, {"fare", "n"}}},
        {"fruit", {{"produce", "n"}, {"crop", "n"}}},
        {"apple", {{"pome", "n"}, {"fruit", "n"}}},
        {"color", {{"hue", "n"}, {"shade", "n"}, {"tint", "n"}}},
        {"often", {{"frequently", "adv"}, {"regularly", "adv"}}},
        {"quickly", {{"rapidly", "adv"}, {"swiftly", "adv"}}},
        {"very", {{"extremely", "adv"}, {"highly", "adv"}}},
    };
}

}  // namespace

StaticSynonymProvider::StaticSynonymProvider() : table_(builtin_table()) {}

StaticSynonymProvider::StaticSynonymProvider(
    std::unordered_map<std::string, std::vector<SynonymEntry>> table)
    : table_(std::move(table)) {}

StaticSynonymProvider StaticSynonymProvider::from_json_text(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::unordered_map<std::string, std::vector<SynonymEntry>> table;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::vector<SynonymEntry> entries;
        for (const auto& e : it.value()) {
            entries.push_back({e.at("word").get<std::string>(),
                               e.value("pos", std::string())});
        }
        table.emplace(to_lower(it.key()), std::move(entries));
    }
    return StaticSynonymProvider(std::move(table));
}

StaticSynonymProvider StaticSynonymProvider::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synonym table: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::vector<SynonymEntry> StaticSynonymProvider::lookup(
    const std::string& token, const std::optional<std::string>& pos_filter) const {
    auto it = table_.find(to_lower(token));
    if (it == table_.end()) return {};
    std::vector<SynonymEntry> out;
    for (const auto& e : it->second) {
        if (to_lower(e.word) == to_lower(token)) continue;
        if (pos_filter && !e.pos.empty() && e.pos != *pos_filter) continue;
        out.push_back(e);
    }
    return out;
}

std::optional<std::string> StaticSynonymProvider::pos_of(const std::string& token) const {
    auto it = table_.find(to_lower(token));
    if (it == table_.end() || it->second.empty() || it->second.front().pos.empty()) {
        return std::nullopt;
    }
    return it->second.front().pos;
}

std::vector<std::string> StaticSynonymProvider::neighbors(const std::string& token,
                                                          int count) const {
    std::vector<std::string> out;
    for (const auto& e : lookup(token, std::nullopt)) {
        out.push_back(e.word);
        if (static_cast<int>(out.size()) >= count) break;
    }
    return out;
}

EmbeddingSynonymProvider::EmbeddingSynonymProvider(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    std::string line;
    size_t dim = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<float> vec;
        float x;
        while (ss >> x) vec.push_back(x);
        if (vec.empty()) continue;
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim) {
            throw std::runtime_error("embedding file: inconsistent dimension at token " + token);
        }
        index_.emplace(to_lower(token), tokens_.size());
        tokens_.push_back(to_lower(token));
        vectors_.push_back(std::move(vec));
    }
}

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<std::string> EmbeddingSynonymProvider::neighbors(const std::string& token,
                                                             int count) const {
    auto it = index_.find(to_lower(token));
    if (it == index_.end()) return {};
    const auto& target = vectors_[it->second];
    std::vector<std::pair<double, size_t>> scored;
    for (size_t i = 0; i < vectors_.size(); ++i) {
        if (i == it->second) continue;
        scored.emplace_back(cosine(target, vectors_[i]), i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> out;
    for (const auto& [s, i] : scored) {
        out.push_back(tokens_[i]);
        if (static_cast<int>(out.size()) >= count) break;
    }
    return out;
}

std::vector<SynonymEntry> EmbeddingSynonymProvider::lookup(
    const std::string& token, const std::optional<std::string>&) const {
    std::vector<SynonymEntry> out;
    for (auto& w : neighbors(token, 50)) out.push_back({std::move(w), ""});
    return out;
}

std::optional<std::string> EmbeddingSynonymProvider::pos_of(const std::string&) const {
    return std::nullopt;
}

}  // namespace vca
