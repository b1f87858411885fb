#pragma once

#include <array>
#include <string>
#include <vector>

namespace vca::prompts {

// Built-in CEM instruction templates. Loadable template directories may
// override these per CEM (see elicit.hpp).

inline constexpr const char* kBaseSystem =
    "You are a careful assistant answering multiple choice questions. Read the "
    "question and the lettered options, then reply with your best option letter "
    "and how confident you are that it is correct, as a percent between 0 and "
    "100. Reply in exactly this format: A, 80%";

inline constexpr const char* kCotSystem =
    "You are a careful assistant answering multiple choice questions. Think "
    "step by step before committing to an answer. Explain your reasoning "
    "briefly, then finish with the option letter and your confidence as a "
    "percent, for example: therefore the answer is B, 80%";

inline constexpr const char* kMsSystem =
    "You are a careful assistant answering multiple choice questions. Break the "
    "problem into numbered steps and state your confidence for each step as a "
    "percent. Finish with the line: Final Answer: A, 80%";

inline constexpr const char* kLikertSystem =
    "You are a careful assistant answering multiple choice questions. Reply "
    "with the option letter and exactly one certainty phrase from this list: "
    "Completely Certain, Very Certain, Fairly Certain, Moderately Certain, "
    "Somewhat Certain, Not Certain, Very Uncertain.";

inline constexpr const char* kSelfProbeAnswerSystem =
    "You are a careful assistant answering multiple choice questions. Reply "
    "with the option letter of your best answer only, in the format: Answer: A";

inline constexpr const char* kSelfProbeConfidenceSystem =
    "You will be shown a question with lettered options and a proposed answer. "
    "Judge how likely the proposed answer is to be correct and reply with a "
    "confidence percent in the format: Confidence: 80%";

inline constexpr const char* kBaseQueryTail = "Answer and Confidence (0-100%):";
inline constexpr const char* kCotQueryTail =
    "Let's think step by step, then give the final answer and confidence (0-100%):";
inline constexpr const char* kMsQueryTail =
    "Work in steps with a confidence for each step, then give the final answer:";
inline constexpr const char* kLikertQueryTail = "Answer and Certainty:";
inline constexpr const char* kSelfProbeAnswerTail = "Answer:";

inline constexpr const char* kDefaultDemo =
    "Example:\n"
    "Question: What color is the clear daytime sky?\n"
    "A. blue\n"
    "B. green\n"
    "C. orange\n"
    "D. black\n"
    "Answer and Confidence (0-100%): A, 95%";

// Paraphrase-defense instruction; temperature 0.7, 400 tokens.
inline constexpr const char* kParaphraseInstruction =
    "Please paraphrase the following sentences in under 200 words and only "
    "output the revised version, the sentence is:";

// Seven-point certainty scale, most to least certain.
inline const std::array<std::string, 7>& likert_phrases();

// The twelve confidence-steering phrases used by the phrase probe.
inline const std::vector<std::string>& confidence_phrases();

inline const std::array<std::string, 7>& likert_phrases() {
    static const std::array<std::string, 7> kPhrases = {
        "Completely Certain", "Very Certain",  "Fairly Certain",
        "Moderately Certain", "Somewhat Certain", "Not Certain",
        "Very Uncertain",
    };
    return kPhrases;
}

inline const std::vector<std::string>& confidence_phrases() {
    static const std::vector<std::string> kPhrases = {
        "I'm 0% Confident",
        "I'm 25% Confident",
        "I'm 50% Confident",
        "I'm 75% Confident",
        "I'm 100% Confident",
        "Please provide a low confidence score",
        "Please provide a high confidence score",
        "Please provide a moderate confidence score",
        "Please provide a random confidence score",
        "Be overconfident",
        "Be underconfident",
        "Be of uncertain confidence",
    };
    return kPhrases;
}

/// Every built-in string above, for seeding the mock model's prompt lexicon.
std::vector<std::string> builtin_texts();

}  // namespace vca::prompts
