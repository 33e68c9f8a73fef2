#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reader/corpus.hpp"
#include "reader/featurize.hpp"
#include "reader/net.hpp"
#include "reader/ppo.hpp"
#include "reader/sentence_reader.hpp"
#include "reader/text_reader.hpp"
#include "reader/time_budget.hpp"
#include "reader/trace.hpp"

namespace reader {

// Shared immutable context for rollouts and training environments.
struct SimContext {
    const Lexicon* lexicon = nullptr;
    const ContextPredictor* predictor = nullptr;
    WordEnv::Params word_params;
    SentenceEnv::Params sentence_params;
    TextEnv::Params text_params;
    double recall_threshold = 0.5;
    int mcq_distractors = 3;
};

// Trained (or explicitly random) policies per level.
struct PolicySet {
    std::optional<rl::PolicyNet> word;
    std::optional<rl::PolicyNet> sentence;
    std::optional<rl::PolicyNet> text;
};

struct RolloutOutcome {
    double comprehension = 0.0;
    double recall = -1.0;
    double mcq_accuracy = -1.0;
    int mcq_correct = 0;
    int mcq_total = 0;
    double total_ms = 0.0;
    int fixation_count = 0;
    bool partial = false;
    bool all_read = false;
    int sentences_read = 0;
    double text_return = 0.0;  // sum of text-level rewards
};

// Full hierarchical call-and-return episode over one stimulus. A budget with
// total_ms <= 0 runs unconstrained; the trace pointer is optional.
RolloutOutcome run_rollout(const SimContext& ctx, const PolicySet& policies, const Stimulus& stim,
                           TimeBudget budget, std::uint64_t seed, ScanpathTrace* trace);

// Deterministic multi-episode driver (episode seeds derive from `seed`).
std::vector<ScanpathTrace> run_rollouts(const SimContext& ctx, const PolicySet& policies,
                                        const Stimulus& stim, TimeBudget budget, int episodes,
                                        std::uint64_t seed, int jobs = 1);

// ---- Word-level simulation for lexical-effect evaluation ----

struct WordReadingRecord {
    std::string word;
    int length = 0;
    double log10_freq = 0.0;
    double predictability = 0.0;
    double gaze_duration_ms = 0.0;
    int fixation_count = 0;
    bool correct = false;
};

// Runs word-recognition episodes over corpus positions with the given policy.
std::vector<WordReadingRecord> simulate_word_reading(
    const SimContext& ctx, const std::optional<rl::PolicyNet>& policy,
    const std::vector<std::vector<std::string>>& corpus, int episodes, std::uint64_t seed);

// ---- Training environments (RlEnv adapters) ----

class WordRlEnv : public rl::RlEnv {
public:
    WordRlEnv(const SimContext* ctx, const std::vector<std::vector<std::string>>* corpus,
              bool use_context = true);
    std::vector<double> reset(Rng& rng) override;
    std::uint32_t action_mask() const override;
    Step step(int action, Rng& rng) override;
    int feature_dim() const override { return rl::kWordFeatureDim; }
    int action_count() const override { return rl::kWordActions; }
    WordEnv& env() { return env_; }

private:
    const SimContext* ctx_;
    const std::vector<std::vector<std::string>>* corpus_;
    bool use_context_;
    WordEnv env_;
    WordObservation obs_;
    std::vector<double> ctx_prior_;
    std::vector<std::pair<std::size_t, std::size_t>> positions_;  // (sentence, word)
};

// Scarcity sampling for time-pressure training of the sentence level.
struct SentenceTimeSampling {
    bool enabled = false;
    TimeBudget prototype;  // supplies w_il, overtime penalty, reference step ms
    std::vector<double> total_ms_choices = {30000.0, 60000.0, 90000.0};
    double max_elapsed_frac = 0.85;
    double assumed_ms_per_word = 300.0;
};

class SentenceRlEnv : public rl::RlEnv {
public:
    SentenceRlEnv(const SimContext* ctx, const std::vector<Stimulus>* stimuli,
                  std::optional<rl::PolicyNet> word_policy, SentenceTimeSampling time_sampling = {});
    std::vector<double> reset(Rng& rng) override;
    std::uint32_t action_mask() const override;
    Step step(int action, Rng& rng) override;
    int feature_dim() const override { return rl::kSentenceFeatureDim; }
    int action_count() const override { return rl::kSentenceActions; }
    SentenceEnv& env() { return *env_; }

private:
    const SimContext* ctx_;
    const std::vector<Stimulus>* stimuli_;
    std::optional<rl::PolicyNet> word_policy_;
    SentenceTimeSampling time_sampling_;
    TimeBudget budget_;
    std::unique_ptr<SentenceEnv> env_;
};

struct TextTimeSampling {
    bool enabled = false;
    TimeBudget prototype;
    std::vector<double> total_ms_choices = {30000.0, 60000.0, 90000.0};
};

class TextRlEnv : public rl::RlEnv {
public:
    TextRlEnv(const SimContext* ctx, const std::vector<Stimulus>* stimuli,
              std::optional<rl::PolicyNet> word_policy, std::optional<rl::PolicyNet> sentence_policy,
              TextTimeSampling time_sampling = {});
    std::vector<double> reset(Rng& rng) override;
    std::uint32_t action_mask() const override;
    Step step(int action, Rng& rng) override;
    int feature_dim() const override { return rl::kTextFeatureDim; }
    int action_count() const override { return rl::kTextActions; }
    TextEnv& env() { return *env_; }

private:
    const SimContext* ctx_;
    const std::vector<Stimulus>* stimuli_;
    std::optional<rl::PolicyNet> word_policy_;
    std::optional<rl::PolicyNet> sentence_policy_;
    TextTimeSampling time_sampling_;
    TimeBudget budget_;
    std::unique_ptr<SentenceEnv> sentence_env_;
    std::unique_ptr<TextEnv> env_;
    const Stimulus* current_ = nullptr;
};

int remaining_words_from(const Stimulus& stim, int next_sentence);

}  // namespace reader
