#pragma once

#include <algorithm>
#include <cmath>

namespace reader {

// Global reading-time budget shared by the wrapped sentence/text levels.
// total_ms <= 0 means unconstrained (the wrappers become inert).
struct TimeBudget {
    double total_ms = 0.0;
    double consumed_ms = 0.0;
    double w_il = 0.70;            // appraisal degradation for skipped words
    double w_rp = 1.30;            // progress-bonus weight
    double w_tp = 1.0;             // scales the progress bonus (unresolved in the source data)
    double overtime_penalty = 0.05;  // per sentence-level step beyond the allocation
    double reference_step_ms = 250.0;  // ms assumed per reading step when deriving step budgets

    bool limited() const { return total_ms > 0.0; }
    double remaining_ms() const { return total_ms - consumed_ms; }
    double remaining_frac() const {
        if (!limited()) return 1.0;
        return std::max(0.0, remaining_ms()) / total_ms;
    }
    bool expired() const { return limited() && consumed_ms >= total_ms; }

    void charge(double duration_ms) { consumed_ms += std::max(0.0, duration_ms); }

    // Sentence-level step allocation: per-word step allowance derived from the
    // remaining time spread over the words still unread in the text.
    int sentence_step_budget(int words_in_sentence, int remaining_words) const {
        if (!limited()) return 1 << 20;
        const double per_word_ms = std::max(0.0, remaining_ms()) / std::max(1, remaining_words);
        const double allowance = per_word_ms / reference_step_ms;
        return std::max(1, static_cast<int>(std::ceil(words_in_sentence * allowance)));
    }
};

class SentenceEnv;
class TextEnv;

// Attach the budget to an environment (observation augmentation, overtime
// penalties, information-loss scaling, forced termination).
void wrap_sentence(SentenceEnv& env, TimeBudget* budget);
void wrap_text(TextEnv& env, TimeBudget* budget);

}  // namespace reader
