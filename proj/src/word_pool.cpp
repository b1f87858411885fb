#include "vca/trigger.hpp"

#include <sstream>

namespace vca {

namespace {

// Curated uncertainty-flavoured vocabulary for trigger initialization and
// mutation. A user-supplied file (one word per line) extends or replaces it.
const char* kPoolText = R"(
doubt doubtful doubting doubted doubts dubious dubiously uncertain uncertainty uncertainties
unsure hesitant hesitance hesitancy hesitate hesitated hesitates hesitating hesitation hedge
unclear unclearly vague vaguely vagueness ambiguous ambiguously ambiguity ambiguities obscure
obscured obscurely obscurity murky murkier murkiest hazy hazier haziest haze
fuzzy fuzzier fuzziest blur blurred blurry dim dimly dimmer faint
faintly fainter faintest tentative tentatively provisional provisionally preliminary speculative speculation
speculate speculated speculates speculating conjecture conjectural guess guessed guesses guessing
guesswork surmise surmised assumption assumptions assume assumed presumably presume presumed
perhaps maybe possibly possible possibility possibilities probable probably probability improbable
improbably unlikely likelier likelihood chance chances chancy risky riskier risk
risks hazard hazardous peril perilous precarious precariously unstable instability unsteady
shaky shakier shakiest wobbly wavering waver wavered wavers unsettled unresolved
undecided undetermined indeterminate indefinite indefinitely inconclusive inconclusively unconfirmed unverified unproven
untested questionable questioned questioning queries query quizzical skeptic skeptical doubtless
skepticism skeptically doubter distrust distrustful mistrust mistrustful suspicion suspicious suspiciously
suspect suspected wary warier wariness cautious cautiously caution cautioned guarded
guardedly leery reluctant reluctance reluctantly unwilling unwillingness ambivalent ambivalence torn
conflicted confusion confused confusing confuse confuses bewildered bewildering bewilderment muddle
perplexed perplexing perplexity puzzled puzzling puzzle puzzles mystery mysterious mysteriously
enigma enigmatic riddle riddles cryptic opaque opacity clouded cloudy clouds
fog foggy fogged mist misty shadow shadowy shade shaded gray
uneasy unease uneasily nervous nervously nervousness anxious anxiously anxiety apprehension
apprehensive apprehensively worry worried worries worrying fret fretful fretting fear
fearful fearfully timid timidly insecure insecurity unconfident underconfident diffident diffidence
bashful sheepish shy shyly faltering falter faltered falters stumble stumbling
stammer stammering mumble mumbling murmur murmuring whisper whispered iffy debatable
debatably disputable disputed dispute disputes contested contestable contentious controversial controversy
arguable arguably unsettling flux fluctuate fluctuating fluctuation variable variably variability
volatile volatility erratic erratically unpredictable unpredictably unpredictability random randomly randomness
arbitrary arbitrarily haphazard haphazardly scattered aimless aimlessly directionless adrift lost
disoriented disorientation bewilder stray strayed straying tenuous tenuously flimsy fragile
fragility frail feeble weak weakly weakness marginal marginally borderline limbo
pending open unknown unknowable unknowns unfamiliar untried unexplored unmapped uncharted
shifting shifty slippery loose loosely approximate approximately roughly rough estimate
estimated estimates estimating estimation guesstimate ballpark imprecise imprecisely imprecision inexact
inexactly inaccurate inaccurately inaccuracy error errors erroneous erring mistake mistaken
mistakes fallible fallibility flawed flaw flaws shortcoming shortcomings limitation limitations
limited partial partially incomplete incompletely insufficient insufficiently inadequate inadequately scant
scarce scarcely sparse sparsely thin thinly fleeting transient transitory ephemeral
momentary temporary temporarily interim stopgap makeshift conditional conditionally contingent contingency
dependent depends depending relative relatively subjective subjectively biased bias noisy
noise distorted distortion skewed skew fuzziness softness soft softly muted
muffled garbled jumbled tangled knotted blurriness dimness grayness vacillate vacillating
vacillation dither dithering waffle waffling equivocate equivocal equivocation noncommittal evasive
evasively evasion elusive elusively indecisive indecision irresolute irresolution halting haltingly
qualm qualms misgiving misgivings reservation reservations scruple scruples disquiet disquieting
unnerved unnerving rattled shaken jittery jitters restless restlessness fidgety edgy
tense tension strained strain stress stressed daunted daunting discouraged discouraging
demoralized disheartened dispirited crestfallen downcast gloomy gloom bleak bleakly dreary
supposedly allegedly reportedly ostensibly seemingly apparently outwardly nominally theoretically hypothetically
hypothesis hypotheses hypothesize conjectures postulate postulated premise premises presupposition presuppose
)";

}  // namespace

std::vector<std::string> builtin_word_pool() {
    std::vector<std::string> out;
    std::istringstream ss(kPoolText);
    std::string word;
    while (ss >> word) out.push_back(word);
    return out;
}

}  // namespace vca
