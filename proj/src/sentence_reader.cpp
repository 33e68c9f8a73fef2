#include "reader/sentence_reader.hpp"

#include <algorithm>
#include <cmath>

#include "reader/errors.hpp"

namespace reader {

double appraise_word(const std::string& word, const std::vector<std::string>& context,
                     const ContextPredictor& predictor, const AppraisalConfig& cfg,
                     std::optional<double> prob_override) {
    double p = prob_override ? *prob_override : predictor.predictability(context, word);
    p = std::clamp(p, 1e-300, 1.0);
    const double surprisal_bits = -std::log2(p);
    return std::exp(-surprisal_bits / cfg.surprisal_scale);
}

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double log_sum = 0.0;
    for (double v : values) {
        if (v <= 0.0) return 0.0;
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(values.size()));
}

double comprehension_score(const std::vector<std::optional<double>>& psi, double psi_floor) {
    if (psi.empty()) return 0.0;
    std::vector<double> vals;
    vals.reserve(psi.size());
    for (const auto& p : psi) vals.push_back(p ? *p : psi_floor);
    return geometric_mean(vals);
}

WordBelief fuse_next_word_belief(const LetterObservation& preview, const ContextPredictor& predictor,
                                 const std::vector<std::string>& context, const AcuityConfig& cfg) {
    const Lexicon& lex = predictor.lexicon();
    const std::vector<double> lm = predictor.predict(context);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(lex.size());
    double total = 0.0;
    for (std::size_t i = 0; i < lex.size(); ++i) {
        const double w = lm[i] * observation_likelihood(preview, lex.word(i), cfg);
        if (w > 0.0) scored.emplace_back(w, i);
        total += w;
    }
    bool fell_back = false;
    if (total < 1e-300) {  // letter evidence wiped everything out: prediction alone
        scored.clear();
        for (std::size_t i = 0; i < lex.size(); ++i)
            if (lm[i] > 0.0) scored.emplace_back(lm[i], i);
        fell_back = true;
    }
    const std::size_t keep = std::min(kMaxCandidates, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), [&lex](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return lex.word(a.second) < lex.word(b.second);
                      });
    scored.resize(keep);
    double mass = 0.0;
    for (const auto& [w, i] : scored) mass += w;
    WordBelief belief;
    belief.underflow_reset = fell_back;
    std::vector<double> probs;
    for (const auto& [w, i] : scored) {
        WordBelief::Candidate c;
        c.word = lex.word(i);
        c.prob = w / mass;
        c.prior = lm[i];
        probs.push_back(c.prob);
        belief.candidates.push_back(std::move(c));
    }
    belief.entropy_bits = entropy_bits(probs);
    return belief;
}

// ---- SentenceEnv ----

void SentenceEnv::attach_budget(TimeBudget* budget, int step_budget, int remaining_words_in_text) {
    budget_ = budget;
    step_budget_override_ = step_budget;
    remaining_words_hint_ = remaining_words_in_text;
}

int SentenceEnv::frontier() const {
    int f = -1;
    for (int i = 0; i < n(); ++i)
        if (psi_[static_cast<std::size_t>(i)]) f = i;
    return f;
}

bool SentenceEnv::all_read() const {
    for (const auto& p : psi_)
        if (!p) return false;
    return true;
}

double SentenceEnv::running_score() const {
    std::vector<double> set;
    for (const auto& p : psi_)
        if (p) set.push_back(*p);
    return geometric_mean(set);
}

std::optional<double> SentenceEnv::predict_override(int word_index, const std::string& word) const {
    if (!stimulus_) return std::nullopt;
    if (word != (*words_)[static_cast<std::size_t>(word_index)]) return std::nullopt;
    return stimulus_->predictability_override(sentence_index_, word_index);
}

void SentenceEnv::refresh_next_belief(Rng& rng) {
    const int next = j_ + 1;
    if (next >= n()) {
        b_next_ = WordBelief{};
        return;
    }
    const LetterObservation preview =
        parafoveal_preview((*words_)[static_cast<std::size_t>(next)], params_.acuity, rng);
    b_next_ = fuse_next_word_belief(preview, *predictor_, context_, params_.acuity);
}

void SentenceEnv::rebuild_observation() {
    obs_ = SentenceObservation{};
    obs_.j = j_;
    obs_.n_words = n();
    obs_.b_next = b_next_;
    obs_.psi_current =
        (j_ >= 0 && psi_[static_cast<std::size_t>(j_)]) ? *psi_[static_cast<std::size_t>(j_)] : 0.0;
    obs_.running_score = running_score();
    obs_.psi_window.assign(static_cast<std::size_t>(params_.c_stm), 1.0);
    for (int r = 1; r <= params_.c_stm; ++r) {
        const int idx = j_ - r;
        if (idx >= 0 && psi_[static_cast<std::size_t>(idx)])
            obs_.psi_window[static_cast<std::size_t>(r - 1)] = *psi_[static_cast<std::size_t>(idx)];
    }
    int read = 0;
    for (const auto& p : psi_)
        if (p) ++read;
    obs_.frac_read = n() > 0 ? static_cast<double>(read) / n() : 0.0;
    obs_.steps = steps_;
    obs_.max_steps = max_steps_;
    if (budget_ && budget_->limited()) {
        obs_.step_alloc_frac = step_budget_ > 0
                                   ? std::max(0.0, static_cast<double>(step_budget_ - steps_) /
                                                       static_cast<double>(step_budget_))
                                   : 1.0;
        obs_.over_budget = step_budget_ > 0 && steps_ > step_budget_;
        obs_.remaining_time_frac = budget_->remaining_frac();
        obs_.remaining_abs = std::min(2.0, std::max(0.0, budget_->remaining_ms()) / 60000.0);
    }
}

SentenceObservation SentenceEnv::reset(const Stimulus* stimulus, int sentence_index, Rng& rng) {
    stimulus_ = stimulus;
    sentence_index_ = sentence_index;
    words_ = &stimulus->sentences[static_cast<std::size_t>(sentence_index)];
    j_ = -1;
    context_.clear();
    psi_.assign(words_->size(), std::nullopt);
    committed_.assign(words_->size(), std::nullopt);
    skipped_.assign(words_->size(), false);
    steps_ = 0;
    max_steps_ = params_.max_steps_per_word * n() + 10;
    done_ = false;
    final_score_ = 0.0;
    final_all_read_ = false;
    truncated_by_time_ = false;
    step_budget_ = 0;
    if (budget_ && budget_->limited())
        step_budget_ = step_budget_override_ > 0
                           ? step_budget_override_
                           : budget_->sentence_step_budget(n(), std::max(remaining_words_hint_, n()));
    refresh_next_belief(rng);
    rebuild_observation();
    return obs_;
}

SentenceStepResult SentenceEnv::step(const SentenceAction& action, Rng& rng) {
    if (done_) throw EpisodeDone();
    SentenceStepResult out;
    out.action = action;

    // Global time expiry cuts the episode before the action is processed.
    if (budget_ && budget_->expired()) {
        done_ = true;
        truncated_by_time_ = true;
        out.done = true;
        out.truncated_by_time = true;
        out.all_read = all_read();
        final_all_read_ = out.all_read;
        final_score_ = comprehension_score(psi_, params_.appraisal.psi_floor);
        out.final_score = final_score_;
        rebuild_observation();
        out.observation = obs_;
        return out;
    }

    ++steps_;
    const bool forced_stop = steps_ >= max_steps_ && action.kind != SentenceAction::Kind::Stop;
    const bool stopping = action.kind == SentenceAction::Kind::Stop || forced_stop;

    if (stopping) {
        done_ = true;
        out.done = true;
        out.all_read = all_read();
        final_all_read_ = out.all_read;
        final_score_ = comprehension_score(psi_, params_.appraisal.psi_floor);
        out.final_score = final_score_;
        out.reward = out.all_read ? params_.r_comp * final_score_ : -params_.r_fail;
    } else if (action.kind == SentenceAction::Kind::Next ||
               action.kind == SentenceAction::Kind::Skip) {
        const int target = j_ + 1;
        if (target >= n()) throw InvalidAction("no next word to read");
        out.word_index = target;
        const std::string& truth = (*words_)[static_cast<std::size_t>(target)];
        if (action.kind == SentenceAction::Kind::Next) {
            const std::vector<double> ctx_prior = predictor_->predict(context_);
            WordEpisodeResult word = word_runner_(target, ctx_prior, rng);
            out.fixations = word.fixations;
            out.committed = word.committed;
            out.word_correct = word.correct;
            std::vector<double> durations;
            for (const auto& f : word.fixations) durations.push_back(f.duration_ms);
            out.time_charged_ms = word_total_time(durations, params_.duration);
            out.psi = appraise_word(word.committed, context_, *predictor_, params_.appraisal,
                                    predict_override(target, word.committed));
            committed_[static_cast<std::size_t>(target)] = word.committed;
        } else {
            out.skipped = true;
            skipped_[static_cast<std::size_t>(target)] = true;
            double psi = b_next_.mass_on(truth);
            if (budget_ && budget_->limited()) psi *= budget_->w_il;  // time-pressure information loss
            out.psi = psi;
            out.committed = b_next_.candidates.empty() ? truth : b_next_.argmax();
            out.word_correct = out.committed == truth;
            committed_[static_cast<std::size_t>(target)] = out.committed;
            out.time_charged_ms = params_.duration.d_saccade;
        }
        psi_[static_cast<std::size_t>(target)] = out.psi;
        context_.push_back(*committed_[static_cast<std::size_t>(target)]);
        if (static_cast<int>(context_.size()) > params_.c_stm)
            context_.erase(context_.begin());
        j_ = target;
        out.reward = -params_.step_cost;
        refresh_next_belief(rng);
    } else {  // Regress
        if (j_ < 1) throw InvalidAction("regress with no prior words");
        const int target = std::max(0, j_ - std::max(1, action.regress_offset));
        out.word_index = target;
        auto& psi = psi_[static_cast<std::size_t>(target)];
        const double boosted = *psi + params_.appraisal.eta * (1.0 - *psi);
        psi = boosted;
        out.psi = boosted;
        out.committed = committed_[static_cast<std::size_t>(target)].value_or(
            (*words_)[static_cast<std::size_t>(target)]);
        // Re-encoding fixation on the revisited word.
        WordFixation fix;
        fix.letter = initial_landing(
            static_cast<int>((*words_)[static_cast<std::size_t>(target)].size()));
        fix.dH_bits = 0.0;
        fix.duration_ms = fixation_duration(0.0, params_.duration, rng);
        out.fixations.push_back(fix);
        out.time_charged_ms = fix.duration_ms * (1.0 + params_.duration.rho) + params_.duration.d_saccade;
        context_.push_back(out.committed);
        if (static_cast<int>(context_.size()) > params_.c_stm)
            context_.erase(context_.begin());
        j_ = target;
        out.reward = -params_.step_cost * params_.w_reg;
        refresh_next_belief(rng);
    }

    if (budget_) {
        budget_->charge(out.time_charged_ms);
        if (budget_->limited() && !stopping && step_budget_ > 0 && steps_ > step_budget_)
            out.reward -= budget_->overtime_penalty;
    }

    rebuild_observation();
    out.observation = obs_;
    return out;
}

SentenceEpisodeSummary SentenceEnv::summary() const {
    SentenceEpisodeSummary s;
    s.all_read = final_all_read_;
    s.score = final_score_;
    s.psi = psi_;
    s.committed = committed_;
    s.skipped = skipped_;
    s.steps = steps_;
    s.truncated_by_time = truncated_by_time_;
    return s;
}

}  // namespace reader
