#include "vca/elicit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "vca/hash.hpp"
#include "vca/prompt_text.hpp"
#include "vca/text.hpp"

namespace vca {

namespace {

struct LetterMention {
    size_t pos;
    size_t end;
    char letter;
};

struct ConfMention {
    size_t pos;
    size_t end;
    double value;
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::vector<LetterMention> find_letters(const std::string& text, int num_options) {
    std::vector<LetterMention> out;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < 'A' || c > 'Z') continue;
        if (option_index(c, num_options) < 0) continue;
        bool standalone = (i == 0 || !is_word_char(text[i - 1])) &&
                          (i + 1 >= text.size() || !is_word_char(text[i + 1]));
        if (standalone) out.push_back({i, i + 1, c});
    }
    return out;
}

bool has_confidence_context(const std::string& lower, size_t num_start) {
    size_t from = num_start > 24 ? num_start - 24 : 0;
    return lower.find("confiden", from) < num_start;
}

// Numbers read as confidences: either followed by '%', or preceded by a
// "confidence" cue. A bare value <= 1 without '%' is a fraction.
std::vector<ConfMention> find_confidences(const std::string& text) {
    const std::string lower = to_lower(text);
    std::vector<ConfMention> out;
    size_t i = 0;
    while (i < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        if (i > 0 && (is_word_char(text[i - 1]) || text[i - 1] == '.')) {
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            continue;
        }
        size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (i + 1 < text.size() && text[i] == '.' &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            ++i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        }
        size_t end = i;
        size_t j = end;
        while (j < text.size() && text[j] == ' ') ++j;
        bool pct = j < text.size() && text[j] == '%';

        double value = std::stod(text.substr(start, end - start));
        if (!pct) {
            if (!has_confidence_context(lower, start)) {
                // Allow the Table-1 "A, 80" shape: a number right after a
                // letter mention still reads as a confidence.
                size_t k = start;
                while (k > 0 && (text[k - 1] == ' ' || text[k - 1] == ',' || text[k - 1] == ':'))
                    --k;
                bool after_letter = k >= 1 && text[k - 1] >= 'A' && text[k - 1] <= 'Z' &&
                                    (k < 2 || !is_word_char(text[k - 2]));
                if (!after_letter) continue;
            }
            if (value <= 1.0) value *= 100.0;
        }
        if (value < 0.0 || value > 100.0) continue;
        out.push_back({start, pct ? j + 1 : end, value});
    }
    return out;
}

bool has_answer_context(const std::string& lower, size_t letter_pos) {
    size_t from = letter_pos > 24 ? letter_pos - 24 : 0;
    return lower.find("answer", from) < letter_pos;
}

std::string read_file_if_exists(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) return {};
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

std::string cem_name(CemKind kind) {
    switch (kind) {
        case CemKind::Base: return "base";
        case CemKind::Cot: return "cot";
        case CemKind::Ms: return "ms";
        case CemKind::Sc: return "sc";
        case CemKind::SelfProbe: return "self_probe";
        case CemKind::Likert: return "likert";
    }
    return "base";
}

CemKind cem_from_name(const std::string& name) {
    if (name == "base") return CemKind::Base;
    if (name == "cot") return CemKind::Cot;
    if (name == "ms") return CemKind::Ms;
    if (name == "sc") return CemKind::Sc;
    if (name == "self_probe") return CemKind::SelfProbe;
    if (name == "likert") return CemKind::Likert;
    throw std::invalid_argument("unknown CEM: " + name);
}

CemSpec CemSpec::make(CemKind kind) {
    CemSpec spec;
    spec.kind = kind;
    switch (kind) {
        case CemKind::Base:
            spec.system_template = prompts::kBaseSystem;
            spec.query_tail = prompts::kBaseQueryTail;
            spec.demonstration = prompts::kDefaultDemo;
            break;
        case CemKind::Cot:
        case CemKind::Sc:
            spec.system_template = prompts::kCotSystem;
            spec.query_tail = prompts::kCotQueryTail;
            spec.demonstration = prompts::kDefaultDemo;
            break;
        case CemKind::Ms:
            spec.system_template = prompts::kMsSystem;
            spec.query_tail = prompts::kMsQueryTail;
            spec.demonstration = std::nullopt;
            break;
        case CemKind::SelfProbe:
            spec.system_template = prompts::kSelfProbeAnswerSystem;
            spec.query_tail = prompts::kSelfProbeAnswerTail;
            spec.demonstration = std::nullopt;
            break;
        case CemKind::Likert:
            spec.system_template = prompts::kLikertSystem;
            spec.query_tail = prompts::kLikertQueryTail;
            spec.demonstration = std::nullopt;
            break;
    }
    return spec;
}

CemSpec CemSpec::make_from_dir(CemKind kind, const std::string& dir) {
    CemSpec spec = make(kind);
    if (dir.empty()) return spec;
    const std::string base = dir + "/" + spec.name();
    if (auto s = read_file_if_exists(base + ".system.txt"); !s.empty()) spec.system_template = s;
    if (auto s = read_file_if_exists(base + ".demo.txt"); !s.empty()) spec.demonstration = s;
    if (auto s = read_file_if_exists(base + ".tail.txt"); !s.empty()) spec.query_tail = s;
    return spec;
}

std::string render_query(const CemSpec& cem, const McqItem& item,
                         const std::string& question_text) {
    if (item.options.size() > 26) {
        throw std::invalid_argument("more than 26 options unsupported");
    }
    std::string out = "Question: " + question_text + "\n";
    for (size_t i = 0; i < item.options.size(); ++i) {
        out += option_letter(static_cast<int>(i));
        out += ". " + item.options[i] + "\n";
    }
    out += cem.query_tail;
    return out;
}

PromptBundle build_prompt(const CemSpec& cem, const McqItem& item,
                          const SurfaceOverrides& overrides) {
    PromptBundle bundle;
    bundle.system_prompt = overrides.system_prompt.value_or(cem.system_template);
    if (overrides.demonstration) {
        bundle.demonstration = *overrides.demonstration;
    } else {
        bundle.demonstration = cem.demonstration;
    }
    bundle.query = render_query(cem, item, overrides.question.value_or(item.question));
    bundle.trigger_suffix = overrides.trigger_suffix;
    return bundle;
}

Verdict parse_verdict(const std::string& text, int num_options) {
    Verdict v;
    v.raw = text;

    const auto letters = find_letters(text, num_options);
    const auto confs = find_confidences(text);

    // Last (letter, confidence) pair: nearest letter within 40 chars before
    // the confidence mention.
    const LetterMention* best_letter = nullptr;
    const ConfMention* best_conf = nullptr;
    for (const auto& c : confs) {
        const LetterMention* nearest = nullptr;
        for (const auto& l : letters) {
            if (l.end <= c.pos && c.pos - l.end <= 40) nearest = &l;
            if (l.pos >= c.pos) break;
        }
        if (nearest) {
            best_letter = nearest;
            best_conf = &c;
        }
    }

    const std::string lower = to_lower(text);
    if (best_letter && best_conf) {
        v.answer = best_letter->letter;
        v.confidence = best_conf->value;
        return v;
    }

    // Unpaired fallbacks.
    for (const auto& l : letters) {
        if (has_answer_context(lower, l.pos)) v.answer = l.letter;
    }
    if (!confs.empty()) {
        v.confidence = confs.back().value;
        if (!v.has_answer()) v.defaulted = true;
    } else {
        v.confidence = max_entropy_confidence(num_options);
        v.defaulted = true;
    }
    return v;
}

std::string render_verdict(const Verdict& v) {
    std::ostringstream out;
    out << "Answer: ";
    if (v.has_answer()) out << v.answer;
    out << ", Confidence: " << v.confidence << "%";
    return out.str();
}

std::optional<double> parse_confidence_only(const std::string& text) {
    auto confs = find_confidences(text);
    if (confs.empty()) return std::nullopt;
    return confs.back().value;
}

MsTrace parse_ms_trace(const std::string& text, int num_options) {
    MsTrace trace;
    const std::string lower = to_lower(text);

    // Segment boundaries at "step <n>" markers and the final-answer line.
    std::vector<size_t> starts;
    for (size_t i = 0; i + 4 < lower.size(); ++i) {
        if (lower.compare(i, 4, "step") == 0 &&
            (i == 0 || !is_word_char(lower[i - 1]))) {
            size_t j = i + 4;
            while (j < lower.size() && lower[j] == ' ') ++j;
            if (j < lower.size() && std::isdigit(static_cast<unsigned char>(lower[j]))) {
                starts.push_back(i);
            }
        }
    }
    const size_t marker = lower.rfind("final answer");
    const size_t steps_end = marker != std::string::npos ? marker : text.size();

    for (size_t s = 0; s < starts.size(); ++s) {
        size_t begin = starts[s];
        size_t end = s + 1 < starts.size() ? starts[s + 1] : steps_end;
        if (end <= begin) continue;
        MsStep step;
        step.text = text.substr(begin, end - begin);
        auto confs = find_confidences(step.text);
        if (!confs.empty()) step.confidence = confs.back().value;
        trace.steps.push_back(std::move(step));
    }

    Verdict final = parse_verdict(text, num_options);

    // The stated final confidence lives after the final-answer marker; with
    // no marker and no steps, the whole text is the final region.
    std::optional<double> final_stated;
    if (marker != std::string::npos) {
        final_stated = parse_confidence_only(text.substr(marker));
    } else if (trace.steps.empty()) {
        final_stated = parse_confidence_only(text);
    }
    trace.final_raw_confidence = final_stated.value_or(final.confidence);

    std::vector<double> values;
    for (const auto& step : trace.steps) {
        if (step.confidence) values.push_back(*step.confidence);
    }
    if (final_stated) values.push_back(*final_stated);
    if (!values.empty()) {
        final.confidence = geometric_mean(values);
        final.defaulted = !final.has_answer();
    }
    trace.final_verdict = final;
    return trace;
}

std::vector<double> likert_scale(int num_options) {
    const double floor = max_entropy_confidence(num_options);
    std::vector<double> out(7);
    const double step = (100.0 - floor) / 6.0;
    for (int i = 0; i < 7; ++i) out[static_cast<size_t>(i)] = 100.0 - step * i;
    out.front() = 100.0;
    out.back() = floor;
    return out;
}

std::optional<double> parse_likert_confidence(const std::string& text, int num_options) {
    const std::string lower = to_lower(text);
    const auto scale = likert_scale(num_options);
    std::optional<double> result;
    size_t best_pos = 0;
    for (size_t i = 0; i < prompts::likert_phrases().size(); ++i) {
        const std::string phrase = to_lower(prompts::likert_phrases()[i]);
        size_t pos = lower.rfind(phrase);
        if (pos == std::string::npos) continue;
        // "Very Certain" is a suffix of "Completely Certain"'s neighbourhood;
        // prefer the longer phrase when both match at overlapping positions.
        if (!result || pos > best_pos) {
            // Reject submatches inside a longer phrase ("very certain" inside
            // "not very certain" is fine, but "certain" alone never matches
            // since every entry is two words).
            bool inside_longer = false;
            for (size_t j = 0; j < prompts::likert_phrases().size(); ++j) {
                if (j == i) continue;
                const std::string other = to_lower(prompts::likert_phrases()[j]);
                size_t opos = lower.rfind(other);
                if (opos != std::string::npos && opos <= pos &&
                    pos < opos + other.size() && other.size() > phrase.size()) {
                    inside_longer = true;
                    break;
                }
            }
            if (!inside_longer) {
                result = scale[i];
                best_pos = pos;
            }
        }
    }
    return result;
}

namespace {

std::vector<ChatMessage> to_messages(const PromptBundle& bundle) {
    std::vector<ChatMessage> msgs;
    msgs.push_back({"system", bundle.effective_system_prompt()});
    std::string user;
    if (bundle.demonstration && !bundle.demonstration->empty()) {
        user = *bundle.demonstration + "\n\n";
    }
    user += bundle.query;
    msgs.push_back({"user", user});
    return msgs;
}

Verdict elicit_single(const CemSpec& cem, const PromptBundle& bundle, Gateway& gateway,
                      int num_options, double temperature, std::optional<long> seed) {
    ChatRequest req;
    req.messages = to_messages(bundle);
    req.temperature = temperature;
    req.max_tokens = cem.max_tokens;
    req.seed = seed;
    ChatResponse resp = gateway.complete(req);
    Verdict v = parse_verdict(resp.text, num_options);
    v.raw = resp.text;
    return v;
}

}  // namespace

ElicitResult elicit(const CemSpec& cem, const McqItem& item, Gateway& gateway,
                    const SurfaceOverrides& overrides, long seed) {
    ElicitResult result;
    const int k = item.num_options();
    PromptBundle bundle = build_prompt(cem, item, overrides);

    switch (cem.kind) {
        case CemKind::Base:
        case CemKind::Cot: {
            result.verdict = elicit_single(cem, bundle, gateway, k, 0.0, seed);
            break;
        }
        case CemKind::Ms: {
            ChatRequest req;
            req.messages = to_messages(bundle);
            req.temperature = 0.0;
            req.max_tokens = cem.max_tokens;
            req.seed = seed;
            ChatResponse resp = gateway.complete(req);
            MsTrace trace = parse_ms_trace(resp.text, k);
            trace.final_verdict.raw = resp.text;
            result.verdict = trace.final_verdict;
            result.ms_trace = std::move(trace);
            break;
        }
        case CemKind::Sc: {
            if (cem.sample_count < 1) {
                throw std::invalid_argument("sc: sample_count must be >= 1");
            }
            for (int i = 0; i < cem.sample_count; ++i) {
                long sample_seed = static_cast<long>(
                    hash_combine(static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(i)) &
                    0x7fffffffffffffffULL);
                result.samples.push_back(
                    elicit_single(cem, bundle, gateway, k, cem.temperature(), sample_seed));
            }
            // Mode over answers; ties go to the earliest tied sample.
            std::map<char, int> counts;
            for (const auto& s : result.samples) counts[s.answer] += 1;
            int best_count = 0;
            for (const auto& [a, n] : counts) best_count = std::max(best_count, n);
            char answer = kNoAnswer;
            for (const auto& s : result.samples) {
                if (counts[s.answer] == best_count) {
                    answer = s.answer;
                    break;
                }
            }
            double mean = 0.0;
            for (const auto& s : result.samples) mean += s.confidence;
            mean /= static_cast<double>(result.samples.size());
            result.verdict.answer = answer;
            result.verdict.confidence = mean;
            result.verdict.defaulted = answer == kNoAnswer;
            result.verdict.raw = result.samples.back().raw;
            break;
        }
        case CemKind::SelfProbe: {
            Verdict first = elicit_single(cem, bundle, gateway, k, 0.0, seed);
            if (!first.has_answer()) {
                result.verdict = first;
                result.verdict.confidence = max_entropy_confidence(k);
                result.verdict.defaulted = true;
                break;
            }
            // Second step: confidence for the proposed answer, with no hint
            // that the model produced it.
            CemSpec conf_spec = cem;
            conf_spec.system_template = prompts::kSelfProbeConfidenceSystem;
            PromptBundle second = bundle;
            second.system_prompt = overrides.system_prompt.value_or(conf_spec.system_template);
            second.query += std::string("\nProposed answer: ") + first.answer + "\nConfidence:";
            Verdict conf = elicit_single(conf_spec, second, gateway, k, 0.0, seed);
            auto stated = parse_confidence_only(conf.raw);
            result.verdict = first;
            result.verdict.confidence = stated.value_or(max_entropy_confidence(k));
            result.verdict.defaulted = !stated.has_value();
            result.verdict.raw = first.raw + "\n" + conf.raw;
            break;
        }
        case CemKind::Likert: {
            ChatRequest req;
            req.messages = to_messages(bundle);
            req.temperature = 0.0;
            req.max_tokens = cem.max_tokens;
            req.seed = seed;
            ChatResponse resp = gateway.complete(req);
            Verdict v = parse_verdict(resp.text, k);
            v.raw = resp.text;
            auto likert = parse_likert_confidence(resp.text, k);
            if (likert) {
                v.confidence = *likert;
                v.defaulted = !v.has_answer();
            } else {
                v.confidence = max_entropy_confidence(k);
                v.defaulted = true;
            }
            result.verdict = v;
            break;
        }
    }
    return result;
}

}  // namespace vca
