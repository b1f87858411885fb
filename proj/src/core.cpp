#include "vca/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vca {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

void McqItem::validate() const {
    if (is_blank(question)) {
        throw std::invalid_argument("McqItem '" + id + "': question is empty");
    }
    if (options.size() < 2) {
        throw std::invalid_argument("McqItem '" + id + "': needs at least 2 options");
    }
    if (options.size() > 26) {
        throw std::invalid_argument("McqItem '" + id + "': more than 26 options unsupported");
    }
    std::set<std::string> distinct(options.begin(), options.end());
    if (distinct.size() != options.size()) {
        throw std::invalid_argument("McqItem '" + id + "': duplicate options");
    }
    for (const auto& opt : options) {
        if (opt.empty()) {
            throw std::invalid_argument("McqItem '" + id + "': empty option");
        }
    }
    if (gold_index < 0 || gold_index >= static_cast<int>(options.size())) {
        throw std::invalid_argument("McqItem '" + id + "': gold index out of range");
    }
}

std::string to_string(Surface s) {
    switch (s) {
        case Surface::Query: return "query";
        case Surface::SystemPrompt: return "system_prompt";
        case Surface::Demonstration: return "demonstration";
    }
    return "query";
}

Surface surface_from_string(const std::string& s) {
    if (s == "query") return Surface::Query;
    if (s == "system_prompt") return Surface::SystemPrompt;
    if (s == "demonstration") return Surface::Demonstration;
    throw std::invalid_argument("unknown surface: " + s);
}

std::string PromptBundle::effective_system_prompt() const {
    if (trigger_suffix && !trigger_suffix->empty()) {
        return system_prompt + " " + *trigger_suffix;
    }
    return system_prompt;
}

std::string PromptBundle::full_text() const {
    std::string out = effective_system_prompt();
    if (demonstration && !demonstration->empty()) {
        out += "\n\n" + *demonstration;
    }
    out += "\n\n" + query;
    return out;
}

char option_letter(int index) {
    if (index < 0 || index >= 26) {
        throw std::invalid_argument("option index out of range: " + std::to_string(index));
    }
    return static_cast<char>('A' + index);
}

int option_index(char letter, int num_options) {
    int idx = letter - 'A';
    if (idx < 0 || idx >= num_options) return -1;
    return idx;
}

double max_entropy_confidence(int num_options) {
    if (num_options < 2) {
        throw std::invalid_argument("max_entropy_confidence: need at least 2 options");
    }
    return 100.0 / num_options;
}

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("geometric_mean: empty input");
    }
    double log_sum = 0.0;
    for (double v : values) {
        if (v < 0.0 || v > 100.0) {
            throw std::invalid_argument("geometric_mean: value outside [0, 100]");
        }
        log_sum += std::log(std::max(v, 0.01));
    }
    return std::exp(log_sum / static_cast<double>(values.size()));
}

}  // namespace vca
