#include "vca/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include "vca/elicit.hpp"
#include "vca/hash.hpp"
#include "vca/prompt_text.hpp"
#include "vca/text.hpp"

namespace vca {

namespace {

std::string format_pct(double v) {
    if (std::abs(v - std::round(v)) < 1e-9) {
        return std::to_string(static_cast<long long>(std::llround(v)));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

double round_to_5(double v) {
    return 5.0 * static_cast<double>(std::llround(v / 5.0));
}

struct ParsedPrompt {
    std::string system_text;
    std::string user_text;
    std::vector<std::string> options;
    std::string context_text;  // everything except the option block
};

// The rendered query carries its options as a contiguous block of
// "A. ..." lines. The last such block wins, so a one-shot demonstration's
// own option block is not mistaken for the live question's.
ParsedPrompt parse_prompt(const ChatRequest& req) {
    ParsedPrompt out;
    for (const auto& m : req.messages) {
        if (m.role == "system") {
            if (!out.system_text.empty()) out.system_text += "\n";
            out.system_text += m.content;
        } else {
            if (!out.user_text.empty()) out.user_text += "\n";
            out.user_text += m.content;
        }
    }

    std::vector<std::string> lines;
    std::stringstream ss(out.user_text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);

    auto option_of = [](const std::string& l) -> int {
        size_t i = l.find_first_not_of(" \t");
        if (i == std::string::npos || i + 2 >= l.size()) return -1;
        char c = l[i];
        if (c < 'A' || c > 'Z') return -1;
        if (l[i + 1] != '.' || l[i + 2] != ' ') return -1;
        return c - 'A';
    };

    size_t best_start = std::string::npos, best_len = 0;
    for (size_t i = 0; i < lines.size();) {
        if (option_of(lines[i]) == 0) {
            size_t j = i;
            int expect = 0;
            while (j < lines.size() && option_of(lines[j]) == expect) {
                ++j;
                ++expect;
            }
            if (expect >= 2) {
                best_start = i;
                best_len = j - i;
            }
            i = j;
        } else {
            ++i;
        }
    }

    std::string user_without_options;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (best_start != std::string::npos && i >= best_start && i < best_start + best_len) {
            const std::string& l = lines[i];
            size_t p = l.find(". ");
            out.options.push_back(l.substr(p + 2));
        } else {
            user_without_options += lines[i];
            user_without_options += "\n";
        }
    }
    out.context_text = out.system_text + "\n" + user_without_options;
    return out;
}

}  // namespace

std::string cache_key(const std::string& model_name, const ChatRequest& req) {
    std::string blob = model_name;
    blob += '\x1e';
    for (const auto& m : req.messages) {
        blob += m.role;
        blob += '\x1f';
        blob += m.content;
        blob += '\x1e';
    }
    blob += "t=" + std::to_string(req.temperature);
    blob += ";m=" + std::to_string(req.max_tokens);
    blob += ";l=" + std::to_string(req.want_logprobs ? 1 : 0);
    blob += ";s=" + (req.seed ? std::to_string(*req.seed) : std::string("none"));
    return hash_hex(fnv1a64(blob)) + ":" + std::to_string(blob.size());
}

Gateway::Gateway(std::shared_ptr<ModelClient> client, bool caching)
    : client_(std::move(client)), caching_(caching) {}

ChatResponse Gateway::complete(const ChatRequest& req) {
    if (req.messages.empty()) {
        throw std::invalid_argument("complete: empty message list");
    }
    std::string key;
    if (caching_) {
        key = cache_key(client_->name(), req);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }

    ChatResponse resp;
    int attempt = 0;
    for (;;) {
        try {
            ++attempt;
            total_calls_.fetch_add(1);
            resp = client_->complete(req);
            break;
        } catch (const TransportError& e) {
            if (attempt >= 3) {
                throw TransportExhaustedError(std::string("transport exhausted after 3 attempts: ") +
                                              e.what());
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_ << (attempt - 1)));
        }
    }

    if (caching_) {
        std::lock_guard<std::mutex> lock(mu_);
        cache_.emplace(key, resp);
    }
    return resp;
}

MockModel::MockModel(const std::vector<McqItem>& dataset,
                     const std::vector<std::string>& extra_vocab_texts) {
    auto absorb = [this](const std::string& text) {
        for (auto& tok : tokenize(text)) vocabulary_.insert(std::move(tok));
    };
    for (const auto& item : dataset) {
        absorb(item.question);
        for (const auto& opt : item.options) absorb(opt);
    }
    for (const auto& text : prompts::builtin_texts()) absorb(text);
    for (const auto& text : extra_vocab_texts) absorb(text);
}

bool MockModel::in_vocabulary(const std::string& lower_token) const {
    return is_numeric_token(lower_token) || is_stop_word(lower_token) ||
           vocabulary_.count(lower_token) > 0;
}

MockModel::Score MockModel::score_context(const std::vector<std::string>& context_tokens,
                                          const std::vector<std::string>& options) const {
    Score s;
    std::set<std::string> query_set;
    int oov = 0;
    std::set<std::string> seen_oov;
    for (const auto& tok : context_tokens) {
        if (is_stop_word(tok)) continue;
        query_set.insert(tok);
        if (!in_vocabulary(tok) && seen_oov.insert(tok).second) ++oov;
    }
    s.oov_count = oov;

    const int k = static_cast<int>(options.size());
    std::vector<int> overlaps(options.size(), 0);
    for (size_t i = 0; i < options.size(); ++i) {
        std::set<std::string> opt_set;
        for (auto& tok : tokenize(options[i])) {
            if (!is_stop_word(tok)) opt_set.insert(std::move(tok));
        }
        int n = 0;
        for (const auto& tok : opt_set) n += query_set.count(tok) ? 1 : 0;
        overlaps[i] = n;
    }

    int best = 0;
    for (size_t i = 1; i < overlaps.size(); ++i) {
        if (overlaps[i] > overlaps[best]) best = static_cast<int>(i);
    }
    s.answer_index = best;
    s.top_overlap = overlaps[best];
    int second = 0;
    for (size_t i = 0; i < overlaps.size(); ++i) {
        if (static_cast<int>(i) == best) continue;
        second = std::max(second, overlaps[i]);
    }
    s.second_overlap = second;

    const double floor = k >= 2 ? max_entropy_confidence(k) : 50.0;
    double conf;
    if (s.top_overlap == 0) {
        conf = floor;  // no lexical signal at all
    } else {
        conf = round_to_5(100.0 * (s.top_overlap + 1) /
                          static_cast<double>(s.top_overlap + s.second_overlap + 2));
    }
    conf -= 5.0 * oov;
    conf = std::clamp(conf, floor, 100.0);
    s.confidence = conf;
    return s;
}

Verdict MockModel::mock_verdict(const McqItem& item, const std::string& query_text) const {
    Score s = score_context(tokenize(query_text), item.options);
    Verdict v;
    v.answer = option_letter(s.answer_index);
    v.confidence = s.confidence;
    return v;
}

std::vector<TokenLogprob> MockModel::prompt_logprobs(const std::string& text) const {
    std::vector<TokenLogprob> out;
    for (auto& tok : tokenize(text)) {
        out.push_back({tok, in_vocabulary(tok) ? -1.0 : -8.0});
    }
    return out;
}

ChatResponse MockModel::complete(const ChatRequest& req) {
    ParsedPrompt p = parse_prompt(req);
    ChatResponse resp;

    if (p.options.size() < 2) {
        resp.text = "I cannot find the answer options in this prompt.";
    } else {
        Score s = score_context(tokenize(p.context_text), p.options);
        int answer_index = s.answer_index;
        double conf = s.confidence;
        const int k = static_cast<int>(p.options.size());

        if (req.temperature > 0.0) {
            std::uint64_t h = fnv1a64(p.context_text);
            h = hash_combine(h, static_cast<std::uint64_t>(req.seed.value_or(0)));
            h = hash_combine(h, static_cast<std::uint64_t>(req.temperature * 1000));
            int delta = static_cast<int>(h % 3) * 5 - 5;
            conf = std::clamp(conf + delta, max_entropy_confidence(k), 100.0);
            if (((h >> 16) % 10) == 0 && k >= 2) {
                answer_index = (answer_index + 1) % k;
            }
        }

        const char letter = option_letter(answer_index);
        const std::string pct = format_pct(conf);
        const std::string sys = to_lower(p.system_text);
        if (sys.find("proposed answer") != std::string::npos) {
            resp.text = "Confidence: " + pct + "%";
        } else if (sys.find("each step") != std::string::npos) {
            resp.text = "Step 1: the options are compared against the question. Confidence: " +
                        pct + "%\nStep 2: the best match is selected. Confidence: " + pct +
                        "%\nFinal Answer: " + letter + ", " + pct + "%";
        } else if (sys.find("certainty phrase") != std::string::npos) {
            const auto scale = likert_scale(k);
            size_t nearest = 0;
            for (size_t i = 1; i < scale.size(); ++i) {
                if (std::abs(scale[i] - conf) < std::abs(scale[nearest] - conf)) nearest = i;
            }
            resp.text = std::string("Answer: ") + letter + ". I am " +
                        prompts::likert_phrases()[nearest] + ".";
        } else if (sys.find("step by step") != std::string::npos) {
            resp.text = std::string("Let's think step by step. The option that best matches the "
                                    "question is ") +
                        letter + ". Therefore the answer is " + letter + ", " + pct + "%";
        } else if (sys.find("option letter of your best answer only") != std::string::npos) {
            resp.text = std::string("Answer: ") + letter;
        } else {
            resp.text = std::string("Answer: ") + letter + ", Confidence: " + pct + "%";
        }
    }

    if (req.want_logprobs) {
        std::string full;
        for (const auto& m : req.messages) {
            if (!full.empty()) full += "\n";
            full += m.content;
        }
        resp.token_logprobs = prompt_logprobs(full);
    }
    return resp;
}

}  // namespace vca
