#include "vca/prompt_text.hpp"

namespace vca::prompts {

std::vector<std::string> builtin_texts() {
    std::vector<std::string> out = {
        kBaseSystem,          kCotSystem,
        kMsSystem,            kLikertSystem,
        kSelfProbeAnswerSystem, kSelfProbeConfidenceSystem,
        kBaseQueryTail,       kCotQueryTail,
        kMsQueryTail,         kLikertQueryTail,
        kSelfProbeAnswerTail, kDefaultDemo,
        kParaphraseInstruction,
        // Words the mock model itself emits, so re-feeding mock output
        // (multi-step corruption) stays in-vocabulary.
        "Step Final Answer Confidence the options are compared against "
        "question best match is selected therefore proposed I am",
        "Question Options",
        "Earlier steps previous reasoning Restate overall confidence",
    };
    for (const auto& p : likert_phrases()) out.push_back(p);
    for (const auto& p : confidence_phrases()) out.push_back(p);
    return out;
}

}  // namespace vca::prompts
