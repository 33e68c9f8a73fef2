#pragma once

#include <array>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "reader/corpus.hpp"
#include "reader/sentence_reader.hpp"
#include "reader/time_budget.hpp"

namespace reader {

struct Proposition {
    std::string subject;
    std::string relation;  // fixed shallow relation tag
    std::string object;
    double activation = 0.0;
    int source_sentence = -1;
};

// Shallow pairwise extraction: stopwords removed, consecutive content words
// become (w_i, "rel", w_{i+1}) triples in stable order.
std::vector<Proposition> parse_propositions(const std::vector<std::string>& sentence_words,
                                            int source_sentence = -1);
bool is_stopword(const std::string& word);

// Proposition store with activation-gated consolidation.
//
// Every gist element encountered accumulates activation: the first encounter
// stores the proposition at activation = relevance, later encounters
// reinforce it via a' = a + (1-a)*delta (never below a fresh relevance
// estimate). A proposition counts as consolidated into long-term memory once
// its activation reaches the threshold tau; only consolidated propositions
// back concept strengths, recall, and question answering. The threshold is
// the knowledge parameter: a lower tau consolidates marginal (bridging)
// propositions earlier.
class LongTermMemory {
public:
    LongTermMemory(double tau, double delta) : tau_(tau), delta_(delta) {}

    // Records one encounter; returns the updated activation.
    double encounter(const Proposition& prop, double relevance);

    bool contains(const std::string& subject, const std::string& object) const;
    double activation(const std::string& subject, const std::string& object) const;
    // Max activation among consolidated propositions involving the concept.
    double concept_strength(const std::string& term) const;

    std::vector<Proposition> consolidated() const;
    const std::vector<Proposition>& store() const { return store_; }
    double tau() const { return tau_; }
    double delta() const { return delta_; }

private:
    static std::string key(const std::string& a, const std::string& b);

    double tau_;
    double delta_;
    std::vector<Proposition> store_;
    std::unordered_map<std::string, std::size_t> index_;  // unordered concept pair -> slot
};

// (strength(subject) + strength(object) + alpha) / (2 + alpha) with
// alpha = 0.5. A concept scores 1 when it appeared in the previous
// sentence's gist, otherwise its consolidated LTM strength.
double relevance(const Proposition& prop, const LongTermMemory& ltm,
                 const std::vector<std::string>& previous_gist_concepts);

struct IntegrationResult {
    std::vector<Proposition> gist;      // top-C_STM by relevance, with activations
    std::vector<double> gist_relevance;
    double phi_raw = 0.0;               // mean gist relevance
};

// Selects the gist, accumulates activations in the store, and returns the
// raw memory appraisal. Empty input yields phi_floor.
IntegrationResult integrate_sentence(LongTermMemory& ltm, const std::vector<Proposition>& props,
                                     int c_stm, const std::vector<std::string>& previous_gist_concepts,
                                     double phi_floor);

// phi = sqrt(phi_raw * sentence_comprehension).
double coherence_appraisal(double phi_raw, double sentence_comprehension);

// Geometric mean over all sentences, unread ones contributing phi_floor;
// returns 0 when nothing has been read.
double text_comprehension(const std::vector<std::optional<double>>& phi, double phi_floor);

// Fraction of gold propositions matched (both concepts, order-free) by a
// consolidated proposition with activation >= recall_threshold.
double recall_proportion(const LongTermMemory& ltm,
                         const std::vector<std::array<std::string, 3>>& gold_props,
                         double recall_threshold);

struct McqQuestion {
    std::array<std::string, 2> target;                // subject, object
    std::vector<std::array<std::string, 2>> distractors;
};

// Picks the option with the highest summed consolidated activation; ties
// (including an empty store) count as incorrect.
bool mcq_probe(const LongTermMemory& ltm, const McqQuestion& question);

// Deterministic question set derived from the gold propositions.
std::vector<McqQuestion> build_mcq_questions(const Stimulus& stimulus, int distractors_per_question,
                                             std::uint64_t seed);

struct TextAction {
    enum class Kind { Next, Regress, Stop };
    Kind kind = Kind::Next;
    int regress_offset = 1;
};

struct TextObservation {
    int k = -1;  // current sentence index
    int n_sentences = 0;
    double phi_current = 0.0;
    double running_score = 0.0;
    std::vector<double> phi_window;  // phi_{k-1} .. phi_{k-window}; out of range -> 1
    double frac_read = 0.0;
    int steps = 0;
    int max_steps = 0;
    double remaining_time_frac = 1.0;
    double remaining_abs = 2.0;
    double progress = 0.0;  // sentences read / total
};

struct TextStepResult {
    TextObservation observation;
    double reward = 0.0;
    bool done = false;
    bool all_read = false;
    bool forced_by_time = false;
    double final_score = 0.0;

    TextAction action;
    int sentence_index = -1;
    double phi = 0.0;
    double sentence_score = 0.0;
    SentenceEpisodeSummary sentence;  // populated for next/regress
};

// Runs one complete sentence-level episode on the given sentence.
using SentenceRunner = std::function<SentenceEpisodeSummary(int sentence_index, Rng& rng)>;

// Text-level POMDP over NEXT / REGRESS(sentence) / STOP with the
// construction-integration memory in the loop.
class TextEnv {
public:
    struct Params {
        AppraisalConfig appraisal;
        int c_stm = 5;
        double tau = 0.32;
        double delta = 0.6;
        double phi_floor = 0.01;
        double step_cost = 0.1;
        double r_comp = 100.0;
        double r_fail = 100.0;
        int regress_window = 5;
        int max_steps_per_sentence = 6;
        bool use_gold_propositions = false;  // bypass extraction with stimulus gold props
    };

    TextEnv(Params params, SentenceRunner runner)
        : params_(params), runner_(std::move(runner)), ltm_(params.tau, params.delta) {}

    void attach_budget(TimeBudget* budget) { budget_ = budget; }

    TextObservation reset(const Stimulus* stimulus, Rng& rng);
    TextStepResult step(const TextAction& action, Rng& rng);

    bool done() const { return done_; }
    bool can_next() const { return !done_ && k_ + 1 < n(); }
    bool can_regress() const { return !done_ && k_ >= 1; }
    int n() const { return stimulus_ ? static_cast<int>(stimulus_->sentence_count()) : 0; }
    const TextObservation& observation() const { return obs_; }
    const LongTermMemory& ltm() const { return ltm_; }
    const std::vector<std::optional<double>>& phi() const { return phi_; }
    double final_score() const { return final_score_; }
    int sentences_read() const;
    const Params& params() const { return params_; }

private:
    void rebuild_observation();
    void read_sentence(int target, TextStepResult& out, Rng& rng);
    double terminal_bonus(double score) const;

    Params params_;
    SentenceRunner runner_;
    LongTermMemory ltm_;
    const Stimulus* stimulus_ = nullptr;
    int k_ = -1;
    std::vector<std::optional<double>> phi_;
    std::vector<double> phi_raw_;
    std::vector<std::string> previous_gist_;  // concepts from the last integrated sentence
    TextObservation obs_;
    int steps_ = 0;
    int max_steps_ = 0;
    bool done_ = true;
    double final_score_ = 0.0;
    TimeBudget* budget_ = nullptr;
};

}  // namespace reader
