#include "reader/word_recognizer.hpp"

#include <algorithm>
#include <cmath>

#include "reader/errors.hpp"

namespace reader {

double WordBelief::mass_on(const std::string& w) const {
    for (const auto& c : candidates)
        if (c.word == w) return c.prob;
    return 0.0;
}

double entropy_bits(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

namespace {

void normalize_and_sort(WordBelief& b) {
    double total = 0.0;
    for (const auto& c : b.candidates) total += c.prob;
    for (auto& c : b.candidates) c.prob /= total;
    std::sort(b.candidates.begin(), b.candidates.end(), [](const auto& a, const auto& c) {
        if (a.prob != c.prob) return a.prob > c.prob;
        if (a.prior != c.prior) return a.prior > c.prior;
        return a.word < c.word;
    });
    if (b.candidates.size() > kMaxCandidates) b.candidates.resize(kMaxCandidates);
    total = 0.0;
    for (const auto& c : b.candidates) total += c.prob;
    std::vector<double> probs;
    probs.reserve(b.candidates.size());
    for (auto& c : b.candidates) {
        c.prob /= total;
        probs.push_back(c.prob);
    }
    b.entropy_bits = entropy_bits(probs);
}

}  // namespace

WordBelief init_belief(const Lexicon& lexicon, const std::vector<double>* context_prior, int len,
                       const AcuityConfig& cfg) {
    if (lexicon.size() == 0) throw LexiconEmpty();
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        const auto& e = lexicon.entry_at(i);
        if (std::abs(e.length - len) > 1) continue;
        double w = e.prior;
        if (context_prior) w *= (*context_prior)[i];
        if (e.length != len) w *= cfg.lambda_len;  // soft length evidence
        if (w > 0.0) scored.emplace_back(w, i);
    }
    if (scored.empty()) throw PriorDegenerate();
    const std::size_t keep = std::min(kMaxCandidates, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), [&lexicon](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return lexicon.word(a.second) < lexicon.word(b.second);
                      });
    scored.resize(keep);
    WordBelief b;
    b.candidates.reserve(keep);
    for (const auto& [w, i] : scored) {
        WordBelief::Candidate c;
        c.word = lexicon.word(i);
        c.prob = w;
        c.prior = w;
        b.candidates.push_back(std::move(c));
    }
    normalize_and_sort(b);
    return b;
}

WordBelief update_belief(const WordBelief& belief, const LetterObservation& obs,
                         const AcuityConfig& cfg) {
    if (obs.empty()) return belief;
    WordBelief post = belief;
    double total = 0.0;
    for (auto& c : post.candidates) {
        c.prob *= observation_likelihood(obs, c.word, cfg);
        total += c.prob;
    }
    if (total < 1e-300) {
        WordBelief reset = belief;  // fall back to the prior for this update
        reset.underflow_reset = true;
        return reset;
    }
    post.underflow_reset = false;
    normalize_and_sort(post);
    return post;
}

void DurationParams::validate() const {
    if (kappa <= 2.0 || kappa >= 4.0) throw ConfigError("kappa must be in (2,4) ms/bit");
    if (rho < 0.1 || rho > 0.3) throw ConfigError("rho must be in [0.1,0.3]");
    if (d_saccade < 20.0 || d_saccade > 50.0) throw ConfigError("d_saccade must be in [20,50] ms");
    if (clip_lo > clip_hi) throw ConfigError("duration clip range inverted");
    if (gamma_shape <= 0.0) throw ConfigError("gamma_shape must be > 0");
}

double fixation_duration(double dH_bits, const DurationParams& params, Rng& rng) {
    const double mu =
        std::clamp(params.d0 + params.kappa * std::max(dH_bits, 0.0), params.clip_lo, params.clip_hi);
    // Scale by a unit-mean Gamma draw so the mean response to mu is exact and
    // common random numbers cancel across parameter candidates.
    return mu * rng.gamma(params.gamma_shape, 1.0 / params.gamma_shape);
}

double word_total_time(const std::vector<double>& first_pass_durations,
                       const DurationParams& params) {
    double total = 0.0;
    for (double d : first_pass_durations) total += d * (1.0 + params.rho) + params.d_saccade;
    return total;
}

double gaze_duration(const std::vector<double>& first_pass_durations) {
    double total = 0.0;
    for (double d : first_pass_durations) total += d;
    return total;
}

int initial_landing(int word_len) {
    return std::max(0, (word_len - 1) / 3);
}

// ---- WordEnv ----

void WordEnv::fixate(int x, Rng& rng) {
    x_ = std::clamp(x, 0, len_ - 1);
    const LetterObservation obs = sample_observation(true_word_, x_, params_.acuity, rng);
    const double h_before = belief_.entropy_bits;
    belief_ = update_belief(belief_, obs, params_.acuity);
    WordFixation fix;
    fix.letter = x_;
    fix.dH_bits = std::max(0.0, h_before - belief_.entropy_bits);
    fix.duration_ms = fixation_duration(fix.dH_bits, params_.duration, rng);
    fixations_.push_back(fix);
}

WordObservation WordEnv::reset(const std::string& true_word,
                               const std::vector<double>* context_prior, Rng& rng) {
    true_word_ = true_word;
    len_ = static_cast<int>(true_word.size());
    belief_ = init_belief(*lexicon_, context_prior, len_, params_.acuity);
    fixations_.clear();
    done_ = false;
    fixate(initial_landing(len_), rng);  // landing fixation, no action cost
    return WordObservation{x_, len_, belief_, fixation_count()};
}

WordStepResult WordEnv::step(const WordAction& action, Rng& rng) {
    if (done_) throw EpisodeDone();
    WordStepResult out;
    if (action.stop || fixation_count() >= params_.max_fixations) {
        done_ = true;
        out.done = true;
        out.committed = belief_.argmax();
        out.correct = out.committed == true_word_;
        out.reward = out.correct ? params_.reward_correct : params_.reward_wrong;
    } else {
        fixate(action.x_next, rng);
        out.reward = -params_.step_cost;
    }
    out.observation = WordObservation{x_, len_, belief_, fixation_count()};
    return out;
}

}  // namespace reader
