#include "reader/featurize.hpp"

#include <algorithm>
#include <cmath>

namespace reader::rl {

namespace {
constexpr double kMaxWordLen = 12.0;
constexpr double kLog2Top5 = 2.321928094887362;  // log2(5)

void push_belief(std::vector<double>& f, const WordBelief& b) {
    for (std::size_t i = 0; i < kMaxCandidates; ++i)
        f.push_back(i < b.candidates.size() ? b.candidates[i].prob : 0.0);
    f.push_back(b.entropy_bits / kLog2Top5);
}
}  // namespace

std::vector<double> featurize(const WordObservation& obs) {
    std::vector<double> f;
    f.reserve(kWordFeatureDim);
    push_belief(f, obs.belief);
    f.push_back(obs.len > 1 ? static_cast<double>(obs.x) / (obs.len - 1) : 0.0);
    f.push_back(obs.len / kMaxWordLen);
    f.push_back(std::min(1.0, obs.fixation_count / 10.0));
    return f;
}

std::vector<double> featurize(const SentenceObservation& obs) {
    std::vector<double> f;
    f.reserve(kSentenceFeatureDim);
    f.push_back(obs.n_words > 0 ? static_cast<double>(obs.j + 1) / obs.n_words : 0.0);
    f.push_back(obs.frac_read);
    push_belief(f, obs.b_next);
    f.push_back(obs.psi_current);
    f.push_back(obs.running_score);
    for (int r = 0; r < 5; ++r)
        f.push_back(r < static_cast<int>(obs.psi_window.size())
                        ? obs.psi_window[static_cast<std::size_t>(r)]
                        : 1.0);
    f.push_back(obs.max_steps > 0 ? static_cast<double>(obs.steps) / obs.max_steps : 0.0);
    f.push_back(obs.step_alloc_frac);
    f.push_back(obs.over_budget ? 1.0 : 0.0);
    f.push_back(obs.remaining_time_frac);
    f.push_back(obs.remaining_abs / 2.0);
    return f;
}

std::vector<double> featurize(const TextObservation& obs) {
    std::vector<double> f;
    f.reserve(kTextFeatureDim);
    f.push_back(obs.n_sentences > 0 ? static_cast<double>(obs.k + 1) / obs.n_sentences : 0.0);
    f.push_back(obs.frac_read);
    f.push_back(obs.phi_current);
    f.push_back(obs.running_score);
    for (int r = 0; r < 5; ++r)
        f.push_back(r < static_cast<int>(obs.phi_window.size())
                        ? obs.phi_window[static_cast<std::size_t>(r)]
                        : 1.0);
    f.push_back(obs.max_steps > 0 ? static_cast<double>(obs.steps) / obs.max_steps : 0.0);
    f.push_back(obs.remaining_time_frac);
    f.push_back(obs.remaining_abs / 2.0);
    f.push_back(obs.progress);
    return f;
}

int slot_to_letter(int slot, int word_len) {
    if (word_len <= 1) return 0;
    const double pos = static_cast<double>(slot) * (word_len - 1) / 5.0;
    return static_cast<int>(std::lround(pos));
}

WordAction decode_word_action(int action, int word_len) {
    WordAction a;
    if (action == kWordActionStop) {
        a.stop = true;
    } else {
        a.stop = false;
        a.x_next = slot_to_letter(action - 1, word_len);
    }
    return a;
}

SentenceAction decode_sentence_action(int action) {
    SentenceAction a;
    if (action == kSentenceActionStop) {
        a.kind = SentenceAction::Kind::Stop;
    } else if (action == kSentenceActionNext) {
        a.kind = SentenceAction::Kind::Next;
    } else if (action == kSentenceActionSkip) {
        a.kind = SentenceAction::Kind::Skip;
    } else {
        a.kind = SentenceAction::Kind::Regress;
        a.regress_offset = action - 2;  // actions 3..7 -> offsets 1..5
    }
    return a;
}

TextAction decode_text_action(int action) {
    TextAction a;
    if (action == kTextActionStop) {
        a.kind = TextAction::Kind::Stop;
    } else if (action == kTextActionNext) {
        a.kind = TextAction::Kind::Next;
    } else {
        a.kind = TextAction::Kind::Regress;
        a.regress_offset = action - 1;  // actions 2..6 -> offsets 1..5
    }
    return a;
}

std::uint32_t word_action_mask(const WordObservation& obs) {
    (void)obs;
    return (1u << kWordActions) - 1u;  // all slots stay in-bounds after clamping
}

std::uint32_t sentence_action_mask(const SentenceEnv& env) {
    std::uint32_t mask = 1u << kSentenceActionStop;
    if (env.can_next()) mask |= (1u << kSentenceActionNext) | (1u << kSentenceActionSkip);
    if (env.can_regress())
        for (int r = 0; r < 5; ++r) mask |= 1u << (3 + r);
    return mask;
}

std::uint32_t text_action_mask(const TextEnv& env) {
    std::uint32_t mask = 1u << kTextActionStop;
    if (env.can_next()) mask |= 1u << kTextActionNext;
    if (env.can_regress())
        for (int r = 0; r < 5; ++r) mask |= 1u << (2 + r);
    return mask;
}

}  // namespace reader::rl
