#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reader/corpus.hpp"
#include "reader/vision.hpp"

namespace reader {

constexpr std::size_t kMaxCandidates = 5;  // bounded lexical memory

// Belief over candidate words: at most five entries, sorted by probability
// descending (ties by higher prior, then lexicographic).
struct WordBelief {
    struct Candidate {
        std::string word;
        double prob = 0.0;
        double prior = 0.0;  // mixed prior, kept for tie-breaking
    };
    std::vector<Candidate> candidates;
    double entropy_bits = 0.0;
    bool underflow_reset = false;  // set when the last update hit BeliefUnderflow

    const std::string& argmax() const { return candidates.front().word; }
    double top_prob() const { return candidates.empty() ? 0.0 : candidates.front().prob; }
    double mass_on(const std::string& w) const;
};

double entropy_bits(const std::vector<double>& probs);

// Frequency prior, optionally multiplied element-wise by a contextual
// distribution indexed like the lexicon, restricted to the top five
// candidates. Length enters as soft evidence: words whose length differs
// from `len` are down-weighted by lambda_len (candidates drawn from len+-1).
WordBelief init_belief(const Lexicon& lexicon, const std::vector<double>* context_prior, int len,
                       const AcuityConfig& cfg);

// Bayes update over the retained candidates; re-normalized and re-sorted.
// Posterior mass below 1e-300 resets to the prior (the input belief) and
// flags underflow_reset.
WordBelief update_belief(const WordBelief& belief, const LetterObservation& obs,
                         const AcuityConfig& cfg);

// Fixation-duration model.
struct DurationParams {
    double d0 = 200.0;        // base fixation ms (sits at the clip edge so kappa stays live)
    double kappa = 2.5;       // ms per bit of entropy reduction
    double clip_lo = 200.0;
    double clip_hi = 250.0;
    double gamma_shape = 9.0; // right-skewed durations, cv ~ 1/3
    double d_saccade = 25.0;  // ms
    double rho = 0.29;        // non-fixation overhead fraction

    void validate() const;
};

// mu = clip(d0 + kappa*dH); sample ~ Gamma(shape, mu/shape).
double fixation_duration(double dH_bits, const DurationParams& params, Rng& rng);

// Total word time sums d*(1+rho) + d_saccade per first-pass fixation.
double word_total_time(const std::vector<double>& first_pass_durations,
                       const DurationParams& params);
// Gaze duration is the plain sum of first-pass fixation durations.
double gaze_duration(const std::vector<double>& first_pass_durations);

// One fixation on the word, as recorded by the environment.
struct WordFixation {
    int letter = 0;
    double duration_ms = 0.0;
    double dH_bits = 0.0;
};

struct WordAction {
    bool stop = false;
    int x_next = 0;  // target letter index when continuing
};

struct WordObservation {
    int x = 0;
    int len = 0;
    WordBelief belief;
    int fixation_count = 0;
};

struct WordStepResult {
    WordObservation observation;
    double reward = 0.0;
    bool done = false;
    bool correct = false;     // valid when done
    std::string committed;    // valid when done
};

// Word-level POMDP. reset() lands the eyes (one automatic fixation, free of
// action cost); each CONTINUE action costs -0.1, STOP commits the belief
// argmax for +-100. Episode return is therefore -0.1*(fixations-1) +- 100.
class WordEnv {
public:
    struct Params {
        AcuityConfig acuity;
        DurationParams duration;
        double step_cost = 0.1;
        double reward_correct = 100.0;
        double reward_wrong = -100.0;
        int max_fixations = 16;
    };

    WordEnv(const Lexicon* lexicon, Params params) : lexicon_(lexicon), params_(params) {}

    WordObservation reset(const std::string& true_word, const std::vector<double>* context_prior,
                          Rng& rng);
    WordStepResult step(const WordAction& action, Rng& rng);

    bool done() const { return done_; }
    int fixation_count() const { return static_cast<int>(fixations_.size()); }
    const std::vector<WordFixation>& fixations() const { return fixations_; }
    const WordBelief& belief() const { return belief_; }
    const std::string& true_word() const { return true_word_; }
    int word_len() const { return len_; }
    int fixation_pos() const { return x_; }
    const Params& params() const { return params_; }

private:
    void fixate(int x, Rng& rng);

    const Lexicon* lexicon_;
    Params params_;
    std::string true_word_;
    int len_ = 0;
    int x_ = 0;
    WordBelief belief_;
    std::vector<WordFixation> fixations_;
    bool done_ = true;
};

// Initial landing position within a word (left of center).
int initial_landing(int word_len);

}  // namespace reader
