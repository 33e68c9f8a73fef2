#include "reader/rollout.hpp"

#include <algorithm>
#include <memory>
#include <thread>

#include "reader/errors.hpp"

namespace reader {

using rl::PolicyNet;

namespace {

int act_policy(const std::optional<PolicyNet>& net, const std::vector<double>& features,
               std::uint32_t mask, int n_actions, Rng& rng) {
    if (net) {
        const PolicyNet::Activations a = net->forward(features);
        return rl::sample_masked(a.logits, mask, rng);
    }
    std::vector<int> valid;
    for (int a = 0; a < n_actions; ++a)
        if ((mask >> a) & 1u) valid.push_back(a);
    return valid[rng.index(valid.size())];
}

// Drives one word-recognition episode with the given policy; used by every
// place that needs a call-and-return word level.
WordEpisodeResult drive_word_episode(WordEnv& env, const std::string& truth,
                                     const std::vector<double>& context_prior,
                                     const std::optional<PolicyNet>& policy, Rng& rng) {
    WordObservation obs = env.reset(truth, &context_prior, rng);
    WordEpisodeResult out;
    while (!env.done()) {
        const std::uint32_t mask = rl::word_action_mask(obs);
        const int action = act_policy(policy, rl::featurize(obs), mask, rl::kWordActions, rng);
        WordStepResult s = env.step(rl::decode_word_action(action, env.word_len()), rng);
        obs = s.observation;
        if (s.done) {
            out.committed = s.committed;
            out.correct = s.correct;
        }
    }
    out.fixations = env.fixations();
    return out;
}

}  // namespace

int remaining_words_from(const Stimulus& stim, int next_sentence) {
    int words = 0;
    for (std::size_t s = static_cast<std::size_t>(std::max(0, next_sentence));
         s < stim.sentence_count(); ++s)
        words += static_cast<int>(stim.sentences[s].size());
    return words;
}

// ---- Hierarchical rollout ----

RolloutOutcome run_rollout(const SimContext& ctx, const PolicySet& policies, const Stimulus& stim,
                           TimeBudget budget, std::uint64_t seed, ScanpathTrace* trace) {
    Rng rng(Rng::splitmix64(seed ^ 0xA11CEull));
    if (trace) {
        trace->stimulus_id = stim.id;
        trace->seed = seed;
    }

    WordEnv word_env(ctx.lexicon, ctx.word_params);
    int fixation_total = 0;
    int active_sentence = -1;

    // Word runner: reads the word picked by the sentence level and emits
    // per-fixation events stamped with overhead-inflated time.
    WordRunner word_runner = [&](int word_index, const std::vector<double>& context_prior,
                                 Rng& wrng) -> WordEpisodeResult {
        const std::string& truth =
            stim.sentences[static_cast<std::size_t>(active_sentence)][static_cast<std::size_t>(word_index)];
        WordObservation obs = word_env.reset(truth, &context_prior, wrng);
        WordEpisodeResult out;
        double t = budget.consumed_ms;
        auto emit_fixation = [&](const WordFixation& fix) {
            ++fixation_total;
            t += fix.duration_ms * (1.0 + ctx.word_params.duration.rho) +
                 ctx.word_params.duration.d_saccade;
            if (!trace) return;
            TraceEvent e;
            e.level = TraceEvent::Level::Word;
            e.action = "fixate";
            e.sentence = active_sentence;
            e.word = word_index;
            e.letter = fix.letter;
            e.duration_ms = fix.duration_ms;
            e.cum_ms = t;
            trace->events.push_back(e);
        };
        emit_fixation(word_env.fixations().back());
        while (!word_env.done()) {
            const std::uint32_t mask = rl::word_action_mask(obs);
            const int action =
                act_policy(policies.word, rl::featurize(obs), mask, rl::kWordActions, wrng);
            WordStepResult s = word_env.step(rl::decode_word_action(action, word_env.word_len()), wrng);
            obs = s.observation;
            if (!s.done) {
                emit_fixation(word_env.fixations().back());
            } else {
                out.committed = s.committed;
                out.correct = s.correct;
                if (trace) {
                    TraceEvent e;
                    e.level = TraceEvent::Level::Word;
                    e.action = "commit";
                    e.sentence = active_sentence;
                    e.word = word_index;
                    e.score = s.correct ? 1.0 : 0.0;
                    e.cum_ms = t;
                    trace->events.push_back(e);
                }
            }
        }
        out.fixations = word_env.fixations();
        return out;
    };

    SentenceEnv sentence_env(ctx.lexicon, ctx.predictor, ctx.sentence_params, word_runner);

    SentenceRunner sentence_runner = [&](int sentence_index, Rng& srng) -> SentenceEpisodeSummary {
        active_sentence = sentence_index;
        sentence_env.attach_budget(&budget, 0, remaining_words_from(stim, sentence_index));
        SentenceObservation obs = sentence_env.reset(&stim, sentence_index, srng);
        // Track regress fixations for the global count (regress emits one).
        while (!sentence_env.done()) {
            const std::uint32_t mask = rl::sentence_action_mask(sentence_env);
            const int action =
                act_policy(policies.sentence, rl::featurize(obs), mask, rl::kSentenceActions, srng);
            SentenceStepResult s = sentence_env.step(rl::decode_sentence_action(action), srng);
            obs = s.observation;
            if (s.action.kind == SentenceAction::Kind::Regress && !s.done) {
                ++fixation_total;
                if (trace) {
                    TraceEvent fe;
                    fe.level = TraceEvent::Level::Word;
                    fe.action = "fixate";
                    fe.sentence = sentence_index;
                    fe.word = s.word_index;
                    fe.letter = s.fixations.empty() ? 0 : s.fixations.front().letter;
                    fe.duration_ms = s.fixations.empty() ? 0.0 : s.fixations.front().duration_ms;
                    fe.cum_ms = budget.consumed_ms;
                    trace->events.push_back(fe);
                }
            }
            if (trace) {
                TraceEvent e;
                e.level = TraceEvent::Level::Sentence;
                e.sentence = sentence_index;
                e.word = s.word_index;
                e.score = s.done ? s.final_score : s.psi;
                e.running = s.observation.running_score;
                e.cum_ms = budget.consumed_ms;
                switch (s.action.kind) {
                    case SentenceAction::Kind::Next: e.action = "next"; break;
                    case SentenceAction::Kind::Skip: e.action = "skip"; break;
                    case SentenceAction::Kind::Regress: e.action = "regress"; break;
                    case SentenceAction::Kind::Stop: e.action = "stop"; break;
                }
                if (s.truncated_by_time) e.action = "expire";
                if (s.done && !s.truncated_by_time && s.action.kind != SentenceAction::Kind::Stop)
                    e.action = "stop";  // step-cap truncation reports as stop
                trace->events.push_back(e);
            }
        }
        return sentence_env.summary();
    };

    TextEnv text_env(ctx.text_params, sentence_runner);
    text_env.attach_budget(&budget);

    RolloutOutcome outcome;
    TextObservation obs = text_env.reset(&stim, rng);
    while (!text_env.done()) {
        const std::uint32_t mask = rl::text_action_mask(text_env);
        const int action = act_policy(policies.text, rl::featurize(obs), mask, rl::kTextActions, rng);
        const TextAction decoded = rl::decode_text_action(action);
        const double pre_ms = budget.consumed_ms;
        const std::size_t mark = trace ? trace->events.size() : 0;
        TextStepResult s = text_env.step(decoded, rng);
        obs = s.observation;
        outcome.text_return += s.reward;
        if (trace) {
            if (s.sentence_index >= 0) {
                // Insert the begin marker ahead of the nested events.
                TraceEvent b;
                b.level = TraceEvent::Level::Text;
                b.action = decoded.kind == TextAction::Kind::Next ? "read" : "regress";
                b.sentence = s.sentence_index;
                b.cum_ms = pre_ms;
                trace->events.insert(trace->events.begin() + static_cast<std::ptrdiff_t>(mark), b);
                TraceEvent e;
                e.level = TraceEvent::Level::Text;
                e.action = "appraise";
                e.sentence = s.sentence_index;
                e.score = s.phi;
                e.running = s.observation.running_score;
                e.cum_ms = budget.consumed_ms;
                trace->events.push_back(e);
            }
            if (s.done) {
                TraceEvent e;
                e.level = TraceEvent::Level::Text;
                e.action = s.forced_by_time ? "expire" : "stop";
                e.score = s.final_score;
                e.running = s.observation.running_score;
                e.cum_ms = budget.consumed_ms;
                trace->events.push_back(e);
            }
        }
        if (s.done) {
            outcome.partial = s.forced_by_time;
            outcome.all_read = s.all_read;
        }
    }

    outcome.comprehension = text_env.final_score();
    outcome.sentences_read = text_env.sentences_read();
    outcome.total_ms = budget.consumed_ms;
    outcome.fixation_count = fixation_total;
    if (!stim.gold_propositions.empty()) {
        outcome.recall =
            recall_proportion(text_env.ltm(), stim.gold_propositions, ctx.recall_threshold);
        const auto questions =
            build_mcq_questions(stim, ctx.mcq_distractors, Rng::splitmix64(seed ^ 0x9C9ull));
        if (!questions.empty()) {
            for (const auto& q : questions)
                if (mcq_probe(text_env.ltm(), q)) ++outcome.mcq_correct;
            outcome.mcq_total = static_cast<int>(questions.size());
            outcome.mcq_accuracy =
                static_cast<double>(outcome.mcq_correct) / static_cast<double>(outcome.mcq_total);
        }
    }
    if (trace) {
        trace->comprehension = outcome.comprehension;
        trace->recall = outcome.recall;
        trace->mcq_accuracy = outcome.mcq_accuracy;
        trace->mcq_correct = outcome.mcq_correct;
        trace->mcq_total = outcome.mcq_total;
        trace->total_ms = outcome.total_ms;
        trace->fixation_count = outcome.fixation_count;
        trace->partial = outcome.partial;
        trace->all_read = outcome.all_read;
    }
    return outcome;
}

std::vector<ScanpathTrace> run_rollouts(const SimContext& ctx, const PolicySet& policies,
                                        const Stimulus& stim, TimeBudget budget, int episodes,
                                        std::uint64_t seed, int jobs) {
    std::vector<ScanpathTrace> traces(static_cast<std::size_t>(episodes));
    auto work = [&](int begin, int end) {
        for (int e = begin; e < end; ++e) {
            TimeBudget b = budget;  // fresh budget per episode
            run_rollout(ctx, policies, stim, b,
                        Rng::splitmix64(seed + static_cast<std::uint64_t>(e) * 0x9E37ull),
                        &traces[static_cast<std::size_t>(e)]);
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || episodes < 2 * jobs) {
        work(0, episodes);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (episodes + jobs - 1) / jobs;
        for (int j = 0; j < jobs; ++j) {
            const int begin = j * chunk;
            const int end = std::min(episodes, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    return traces;
}

// ---- Word-level simulation ----

std::vector<WordReadingRecord> simulate_word_reading(
    const SimContext& ctx, const std::optional<PolicyNet>& policy,
    const std::vector<std::vector<std::string>>& corpus, int episodes, std::uint64_t seed) {
    std::vector<std::pair<std::size_t, std::size_t>> positions;
    for (std::size_t s = 0; s < corpus.size(); ++s)
        for (std::size_t w = 0; w < corpus[s].size(); ++w)
            if (ctx.lexicon->contains(corpus[s][w])) positions.emplace_back(s, w);
    if (positions.empty()) throw ReaderError("no in-vocabulary corpus positions to simulate");

    std::vector<WordReadingRecord> records;
    records.reserve(static_cast<std::size_t>(episodes));
    WordEnv env(ctx.lexicon, ctx.word_params);
    for (int e = 0; e < episodes; ++e) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(e));
        const auto [s, w] = positions[rng.index(positions.size())];
        const std::string& truth = corpus[s][w];
        std::vector<std::string> context(corpus[s].begin(),
                                         corpus[s].begin() + static_cast<std::ptrdiff_t>(w));
        const std::vector<double> ctx_prior = ctx.predictor->predict(context);

        WordReadingRecord rec;
        rec.word = truth;
        rec.length = static_cast<int>(truth.size());
        rec.log10_freq = ctx.lexicon->entry(truth).log10_freq;
        rec.predictability = ctx.predictor->predictability(context, truth);

        const WordEpisodeResult res = drive_word_episode(env, truth, ctx_prior, policy, rng);
        rec.correct = res.correct;
        std::vector<double> durations;
        for (const auto& f : res.fixations) durations.push_back(f.duration_ms);
        rec.gaze_duration_ms = gaze_duration(durations);
        rec.fixation_count = static_cast<int>(durations.size());
        records.push_back(std::move(rec));
    }
    return records;
}

// ---- Training environment adapters ----

WordRlEnv::WordRlEnv(const SimContext* ctx, const std::vector<std::vector<std::string>>* corpus,
                     bool use_context)
    : ctx_(ctx), corpus_(corpus), use_context_(use_context), env_(ctx->lexicon, ctx->word_params) {
    for (std::size_t s = 0; s < corpus_->size(); ++s)
        for (std::size_t w = 0; w < (*corpus_)[s].size(); ++w)
            if (ctx_->lexicon->contains((*corpus_)[s][w])) positions_.emplace_back(s, w);
    if (positions_.empty()) throw ReaderError("word training corpus has no in-vocabulary tokens");
}

std::vector<double> WordRlEnv::reset(Rng& rng) {
    const auto [s, w] = positions_[rng.index(positions_.size())];
    const std::string& truth = (*corpus_)[s][w];
    if (use_context_) {
        std::vector<std::string> context((*corpus_)[s].begin(),
                                         (*corpus_)[s].begin() + static_cast<std::ptrdiff_t>(w));
        ctx_prior_ = ctx_->predictor->predict(context);
        obs_ = env_.reset(truth, &ctx_prior_, rng);
    } else {
        obs_ = env_.reset(truth, nullptr, rng);
    }
    return rl::featurize(obs_);
}

std::uint32_t WordRlEnv::action_mask() const { return rl::word_action_mask(obs_); }

rl::RlEnv::Step WordRlEnv::step(int action, Rng& rng) {
    WordStepResult s = env_.step(rl::decode_word_action(action, env_.word_len()), rng);
    obs_ = s.observation;
    return Step{rl::featurize(obs_), s.reward, s.done};
}

namespace {

// Shared state for the per-episode runner closures of the adapters.
struct SentenceRunnerState {
    WordEnv word_env;
    const Stimulus* stim = nullptr;
    int sentence = -1;
    const std::optional<PolicyNet>* policy = nullptr;
};

}  // namespace

SentenceRlEnv::SentenceRlEnv(const SimContext* ctx, const std::vector<Stimulus>* stimuli,
                             std::optional<PolicyNet> word_policy,
                             SentenceTimeSampling time_sampling)
    : ctx_(ctx), stimuli_(stimuli), word_policy_(std::move(word_policy)),
      time_sampling_(time_sampling) {
    if (stimuli_->empty()) throw ReaderError("sentence training needs at least one stimulus");
}

std::vector<double> SentenceRlEnv::reset(Rng& rng) {
    const Stimulus& stim = (*stimuli_)[rng.index(stimuli_->size())];
    const int sentence = static_cast<int>(rng.index(stim.sentence_count()));
    const int words = static_cast<int>(stim.sentences[static_cast<std::size_t>(sentence)].size());

    budget_ = time_sampling_.prototype;
    int remaining_words = 0;
    if (time_sampling_.enabled) {
        budget_.total_ms =
            time_sampling_.total_ms_choices[rng.index(time_sampling_.total_ms_choices.size())];
        budget_.consumed_ms = budget_.total_ms * rng.uniform(0.0, time_sampling_.max_elapsed_frac);
        remaining_words = std::max(
            words, static_cast<int>(budget_.remaining_ms() / time_sampling_.assumed_ms_per_word));
    } else {
        budget_.total_ms = 0.0;  // unlimited; serves only as a clock
        budget_.consumed_ms = 0.0;
    }

    auto state = std::make_shared<SentenceRunnerState>(SentenceRunnerState{
        WordEnv(ctx_->lexicon, ctx_->word_params), &stim, sentence, &word_policy_});
    WordRunner runner = [state](int word_index, const std::vector<double>& context_prior,
                                Rng& wrng) -> WordEpisodeResult {
        const std::string& truth = state->stim->sentences[static_cast<std::size_t>(state->sentence)]
                                                         [static_cast<std::size_t>(word_index)];
        return drive_word_episode(state->word_env, truth, context_prior, *state->policy, wrng);
    };
    env_ = std::make_unique<SentenceEnv>(ctx_->lexicon, ctx_->predictor, ctx_->sentence_params,
                                         std::move(runner));
    env_->attach_budget(&budget_, 0, remaining_words);
    const SentenceObservation obs = env_->reset(&stim, sentence, rng);
    return rl::featurize(obs);
}

std::uint32_t SentenceRlEnv::action_mask() const { return rl::sentence_action_mask(*env_); }

rl::RlEnv::Step SentenceRlEnv::step(int action, Rng& rng) {
    SentenceStepResult s = env_->step(rl::decode_sentence_action(action), rng);
    return Step{rl::featurize(s.observation), s.reward, s.done};
}

TextRlEnv::TextRlEnv(const SimContext* ctx, const std::vector<Stimulus>* stimuli,
                     std::optional<PolicyNet> word_policy, std::optional<PolicyNet> sentence_policy,
                     TextTimeSampling time_sampling)
    : ctx_(ctx), stimuli_(stimuli), word_policy_(std::move(word_policy)),
      sentence_policy_(std::move(sentence_policy)), time_sampling_(time_sampling) {
    if (stimuli_->empty()) throw ReaderError("text training needs at least one stimulus");
}

std::vector<double> TextRlEnv::reset(Rng& rng) {
    current_ = &(*stimuli_)[rng.index(stimuli_->size())];
    budget_ = time_sampling_.prototype;
    budget_.consumed_ms = 0.0;
    budget_.total_ms =
        time_sampling_.enabled
            ? time_sampling_.total_ms_choices[rng.index(time_sampling_.total_ms_choices.size())]
            : 0.0;

    struct RunnerState {
        WordEnv word_env;
        std::unique_ptr<SentenceEnv> sentence_env;
        const Stimulus* stim;
        TimeBudget* budget;
        const std::optional<PolicyNet>* word_policy;
        const std::optional<PolicyNet>* sentence_policy;
        int active_sentence = -1;
    };
    auto state = std::make_shared<RunnerState>(RunnerState{
        WordEnv(ctx_->lexicon, ctx_->word_params), nullptr, current_, &budget_, &word_policy_,
        &sentence_policy_});
    WordRunner word_runner = [state](int word_index, const std::vector<double>& context_prior,
                                     Rng& wrng) -> WordEpisodeResult {
        const std::string& truth =
            state->stim->sentences[static_cast<std::size_t>(state->active_sentence)]
                                  [static_cast<std::size_t>(word_index)];
        return drive_word_episode(state->word_env, truth, context_prior, *state->word_policy, wrng);
    };
    state->sentence_env = std::make_unique<SentenceEnv>(ctx_->lexicon, ctx_->predictor,
                                                        ctx_->sentence_params, std::move(word_runner));
    SentenceRunner sentence_runner = [state](int sentence_index, Rng& srng) -> SentenceEpisodeSummary {
        state->active_sentence = sentence_index;
        state->sentence_env->attach_budget(state->budget, 0,
                                           remaining_words_from(*state->stim, sentence_index));
        SentenceObservation obs = state->sentence_env->reset(state->stim, sentence_index, srng);
        while (!state->sentence_env->done()) {
            const std::uint32_t mask = rl::sentence_action_mask(*state->sentence_env);
            const int action = act_policy(*state->sentence_policy, rl::featurize(obs), mask,
                                          rl::kSentenceActions, srng);
            SentenceStepResult st =
                state->sentence_env->step(rl::decode_sentence_action(action), srng);
            obs = st.observation;
        }
        return state->sentence_env->summary();
    };
    env_ = std::make_unique<TextEnv>(ctx_->text_params, std::move(sentence_runner));
    env_->attach_budget(&budget_);
    const TextObservation obs = env_->reset(current_, rng);
    return rl::featurize(obs);
}

std::uint32_t TextRlEnv::action_mask() const { return rl::text_action_mask(*env_); }

rl::RlEnv::Step TextRlEnv::step(int action, Rng& rng) {
    TextStepResult s = env_->step(rl::decode_text_action(action), rng);
    return Step{rl::featurize(s.observation), s.reward, s.done};
}

}  // namespace reader
