#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reader/corpus.hpp"
#include "reader/time_budget.hpp"
#include "reader/word_recognizer.hpp"

namespace reader {

struct AppraisalConfig {
    double surprisal_scale = 10.0;  // bits; psi = exp(-surprisal/scale)
    double eta = 0.3;               // regression re-encoding boost
    double psi_floor = 0.01;        // appraisal assigned to unread words at scoring
};

// psi = exp(-surprisal(word|context)/scale), surprisal in bits.
double appraise_word(const std::string& word, const std::vector<std::string>& context,
                     const ContextPredictor& predictor, const AppraisalConfig& cfg,
                     std::optional<double> prob_override = std::nullopt);

// Geometric mean; empty input scores 0.
double geometric_mean(const std::vector<double>& values);
// Unset entries count as psi_floor (scoring a terminated episode).
double comprehension_score(const std::vector<std::optional<double>>& psi, double psi_floor);

// b'(w) proportional to P(w|letters) * P_LM(w|context), pruned to the top
// five. Underflow falls back to the contextual prediction alone.
WordBelief fuse_next_word_belief(const LetterObservation& preview, const ContextPredictor& predictor,
                                 const std::vector<std::string>& context, const AcuityConfig& cfg);

struct SentenceAction {
    enum class Kind { Next, Skip, Regress, Stop };
    Kind kind = Kind::Next;
    int regress_offset = 1;  // 1..C_STM, target = j - offset clamped to 0
};

struct SentenceObservation {
    int j = -1;  // current word index; -1 before the first word
    int n_words = 0;
    WordBelief b_next;                 // fused belief over the upcoming word
    double psi_current = 0.0;          // appraisal of the current word
    double running_score = 0.0;        // u_t over the words read so far
    std::vector<double> psi_window;    // psi_{j-1} .. psi_{j-C_STM}; out of range -> 1
    double frac_read = 0.0;
    int steps = 0;
    int max_steps = 0;
    // Budget-wrapped extras (inert defaults when unwrapped).
    double step_alloc_frac = 1.0;
    bool over_budget = false;
    double remaining_time_frac = 1.0;
    double remaining_abs = 2.0;  // remaining_ms / 60000, capped at 2
};

// What happened in one sentence-level step, for trace building.
struct SentenceStepResult {
    SentenceObservation observation;
    double reward = 0.0;
    bool done = false;
    bool all_read = false;           // valid when done
    double final_score = 0.0;        // valid when done
    bool truncated_by_time = false;  // episode cut by global budget expiry

    SentenceAction action;           // echo of what was executed
    int word_index = -1;             // word acted on (next/skip/regress target)
    double psi = 0.0;                // appraisal assigned to that word
    double time_charged_ms = 0.0;
    bool skipped = false;
    std::string committed;                  // committed identity (next/skip)
    std::vector<WordFixation> fixations;    // word-level fixations this step
    bool word_correct = false;
};

// Outcome of a lower-level word episode, supplied by the hierarchy runner.
struct WordEpisodeResult {
    std::string committed;
    bool correct = false;
    std::vector<WordFixation> fixations;
};
using WordRunner =
    std::function<WordEpisodeResult(int word_index, const std::vector<double>& context_prior, Rng&)>;

struct SentenceEpisodeSummary {
    bool all_read = false;
    double score = 0.0;  // terminal comprehension over the sentence
    std::vector<std::optional<double>> psi;
    std::vector<std::optional<std::string>> committed;
    std::vector<bool> skipped;
    int steps = 0;
    bool truncated_by_time = false;
};

// Sentence-level POMDP over NEXT / SKIP / REGRESS / STOP.
class SentenceEnv {
public:
    struct Params {
        AcuityConfig acuity;
        DurationParams duration;
        AppraisalConfig appraisal;
        int c_stm = 5;            // short-term buffer span, also the regress window
        double step_cost = 0.1;
        double w_reg = 0.8;       // regression cost scale
        double r_comp = 100.0;
        double r_fail = 100.0;
        int max_steps_per_word = 6;  // truncation guard: max_steps = n*this + 10
    };

    SentenceEnv(const Lexicon* lexicon, const ContextPredictor* predictor, Params params,
                WordRunner word_runner)
        : lexicon_(lexicon), predictor_(predictor), params_(params),
          word_runner_(std::move(word_runner)) {}

    // Budget wrapping; step_budget <= 0 derives it from the budget at reset.
    void attach_budget(TimeBudget* budget, int step_budget = 0, int remaining_words_in_text = 0);

    SentenceObservation reset(const Stimulus* stimulus, int sentence_index, Rng& rng);
    SentenceStepResult step(const SentenceAction& action, Rng& rng);

    bool done() const { return done_; }
    // Valid action kinds given the current state.
    bool can_next() const { return !done_ && j_ + 1 < n(); }
    bool can_regress() const { return !done_ && j_ >= 1; }
    int n() const { return static_cast<int>(words_->size()); }
    const SentenceObservation& observation() const { return obs_; }
    SentenceEpisodeSummary summary() const;
    const Params& params() const { return params_; }
    const std::vector<std::optional<double>>& psi() const { return psi_; }

private:
    void refresh_next_belief(Rng& rng);
    void rebuild_observation();
    double running_score() const;
    int frontier() const;
    bool all_read() const;
    std::optional<double> predict_override(int word_index, const std::string& word) const;

    const Lexicon* lexicon_;
    const ContextPredictor* predictor_;
    Params params_;
    WordRunner word_runner_;

    const Stimulus* stimulus_ = nullptr;
    int sentence_index_ = 0;
    const std::vector<std::string>* words_ = nullptr;
    int j_ = -1;
    std::vector<std::string> context_;  // last c_stm committed words
    std::vector<std::optional<double>> psi_;
    std::vector<std::optional<std::string>> committed_;
    std::vector<bool> skipped_;
    WordBelief b_next_;
    SentenceObservation obs_;
    int steps_ = 0;
    int max_steps_ = 0;
    bool done_ = true;
    double final_score_ = 0.0;
    bool final_all_read_ = false;
    bool truncated_by_time_ = false;

    TimeBudget* budget_ = nullptr;
    int step_budget_ = 0;
    int step_budget_override_ = 0;
    int remaining_words_hint_ = 0;
};

}  // namespace reader
