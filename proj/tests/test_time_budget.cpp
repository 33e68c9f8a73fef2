#include <doctest.h>

#include <cmath>

#include "reader/sentence_reader.hpp"
#include "reader/text_reader.hpp"
#include "reader/time_budget.hpp"

using namespace reader;

namespace {

WordRunner one_fixation_runner(const Stimulus* stim, const int* sentence, double duration) {
    return [stim, sentence, duration](int word_index, const std::vector<double>&, Rng&) {
        WordEpisodeResult r;
        r.committed =
            stim->sentences[static_cast<std::size_t>(*sentence)][static_cast<std::size_t>(word_index)];
        r.correct = true;
        r.fixations.push_back(WordFixation{0, duration, 0.5});
        return r;
    };
}

SentenceRunner fixed_sentence_runner(const Stimulus* stim, double u, double ms_per_sentence,
                                     TimeBudget* budget) {
    return [stim, u, ms_per_sentence, budget](int sentence_index, Rng&) {
        SentenceEpisodeSummary s;
        s.all_read = true;
        s.score = u;
        for (const auto& w : stim->sentences[static_cast<std::size_t>(sentence_index)]) {
            s.psi.push_back(u);
            s.committed.push_back(w);
            s.skipped.push_back(false);
        }
        budget->charge(ms_per_sentence);
        return s;
    };
}

}  // namespace

TEST_SUITE("time_budget") {

TEST_CASE("charge bookkeeping") {
    TimeBudget b;
    b.total_ms = 30000.0;
    b.charge(283.0);
    CHECK(b.consumed_ms == doctest::Approx(283.0));
    b.charge(0.0);
    CHECK(b.consumed_ms == doctest::Approx(283.0));
    CHECK(b.remaining_ms() == doctest::Approx(30000.0 - 283.0));
    // Cumulative charges sum exactly.
    TimeBudget c;
    c.total_ms = 1e6;
    double total = 0.0;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double d = rng.uniform() * 400.0;
        c.charge(d);
        total += d;
    }
    CHECK(c.consumed_ms == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("sentence step budget derives from remaining time per word") {
    TimeBudget b;
    b.total_ms = 30000.0;
    b.reference_step_ms = 250.0;
    // 30000 ms over 60 remaining words = 500 ms/word = 2 steps/word.
    CHECK(b.sentence_step_budget(10, 60) == 20);
    b.consumed_ms = 29990.0;
    CHECK(b.sentence_step_budget(10, 60) == 1);  // floor of one step
}

TEST_CASE("overtime steps add the penalty, within-budget steps do not") {
    Lexicon lex = Lexicon::from_counts({{"aa", 1.0}, {"bb", 1.0}, {"cc", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\naa bb cc aa bb\n");
    int sentence = 0;
    SentenceEnv env(&lex, &predictor, SentenceEnv::Params{},
                    one_fixation_runner(&stim, &sentence, 200.0));
    TimeBudget budget;
    budget.total_ms = 1e9;  // effectively no expiry
    budget.overtime_penalty = 0.05;
    env.attach_budget(&budget, 3, 5);  // explicit 3-step allocation
    Rng rng(4);
    env.reset(&stim, 0, rng);
    SentenceStepResult s1 = env.step({SentenceAction::Kind::Next, 0}, rng);
    CHECK(s1.reward == doctest::Approx(-0.1));
    env.step({SentenceAction::Kind::Next, 0}, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    SentenceStepResult s4 = env.step({SentenceAction::Kind::Next, 0}, rng);
    CHECK(s4.reward == doctest::Approx(-0.1 - 0.05).epsilon(1e-12));
    SentenceStepResult s5 = env.step({SentenceAction::Kind::Next, 0}, rng);
    CHECK(s5.reward == doctest::Approx(-0.1 - 0.05).epsilon(1e-12));
}

TEST_CASE("skip appraisal scales by w_il under a limited budget") {
    Lexicon lex = Lexicon::from_counts({{"cat", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\ncat cat\n");
    int sentence = 0;
    SentenceEnv env(&lex, &predictor, SentenceEnv::Params{},
                    one_fixation_runner(&stim, &sentence, 200.0));
    TimeBudget budget;
    budget.total_ms = 30000.0;
    budget.w_il = 0.7;
    env.attach_budget(&budget, 0, 2);
    Rng rng(5);
    env.reset(&stim, 0, rng);
    SentenceStepResult skip = env.step({SentenceAction::Kind::Skip, 0}, rng);
    // b_next(cat) = 1 in a one-word lexicon; psi = 1 * w_il.
    CHECK(skip.psi == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("unlimited budget leaves the sentence environment unchanged") {
    Lexicon lex = Lexicon::from_counts({{"aa", 2.0}, {"bb", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\naa bb aa\n");
    int sentence = 0;
    SentenceEnv::Params params;
    auto run = [&](TimeBudget* budget) {
        SentenceEnv env(&lex, &predictor, params, one_fixation_runner(&stim, &sentence, 200.0));
        if (budget) env.attach_budget(budget, 0, 0);
        Rng rng(77);
        env.reset(&stim, 0, rng);
        std::vector<double> rewards;
        std::vector<std::vector<double>> features;
        rewards.push_back(0.0);
        SentenceStepResult s = env.step({SentenceAction::Kind::Next, 0}, rng);
        rewards.push_back(s.reward);
        s = env.step({SentenceAction::Kind::Skip, 0}, rng);
        rewards.push_back(s.reward);
        CHECK(s.observation.step_alloc_frac == 1.0);
        CHECK(s.observation.remaining_time_frac == 1.0);
        s = env.step({SentenceAction::Kind::Next, 0}, rng);
        rewards.push_back(s.reward);
        s = env.step({SentenceAction::Kind::Stop, 0}, rng);
        rewards.push_back(s.reward);
        return rewards;
    };
    TimeBudget unlimited;  // total_ms = 0
    unlimited.w_rp = 0.0;
    const auto with = run(&unlimited);
    const auto without = run(nullptr);
    REQUIRE(with.size() == without.size());
    for (std::size_t i = 0; i < with.size(); ++i)
        CHECK(with[i] == doctest::Approx(without[i]).epsilon(1e-12));
}

TEST_CASE("text wrapper force-terminates on expiry with comprehension plus progress bonus") {
    Stimulus stim =
        Stimulus::from_text("t", "[meta]\n[text]\nthe cat sat\nthe sat mat\nthe mat dog\n");
    TimeBudget budget;
    budget.total_ms = 1000.0;
    budget.w_rp = 1.3;
    budget.w_tp = 1.0;
    TextEnv::Params params;
    params.tau = 0.0;
    TextEnv env(params, fixed_sentence_runner(&stim, 0.81, 600.0, &budget));
    env.attach_budget(&budget);
    Rng rng(6);
    env.reset(&stim, rng);
    env.step({TextAction::Kind::Next, 0}, rng);  // consumes 600 ms
    env.step({TextAction::Kind::Next, 0}, rng);  // consumes 1200 ms total; expired
    CHECK(budget.expired());
    TextStepResult forced = env.step({TextAction::Kind::Next, 0}, rng);
    CHECK(forced.done);
    CHECK(forced.forced_by_time);
    // Terminal = R_comp * score + w_tp * w_rp * R_comp * score * progress.
    const double score = forced.final_score;
    const double progress = 2.0 / 3.0;
    CHECK(forced.reward ==
          doctest::Approx(100.0 * score + 1.3 * 100.0 * score * progress).epsilon(1e-9));
}

TEST_CASE("full read with budget earns the multiplicative progress bonus") {
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\nthe cat sat\nthe sat mat\n");
    TimeBudget budget;
    budget.total_ms = 1e7;
    budget.w_rp = 1.3;
    TextEnv::Params params;
    params.tau = 0.0;
    TextEnv env(params, fixed_sentence_runner(&stim, 0.9, 100.0, &budget));
    env.attach_budget(&budget);
    Rng rng(7);
    env.reset(&stim, rng);
    env.step({TextAction::Kind::Next, 0}, rng);
    env.step({TextAction::Kind::Next, 0}, rng);
    TextStepResult stop = env.step({TextAction::Kind::Stop, 0}, rng);
    CHECK(stop.all_read);
    const double score = stop.final_score;
    CHECK(stop.reward == doctest::Approx(100.0 * score * (1.0 + 1.3)).epsilon(1e-9));
}

TEST_CASE("remaining-time observation starts at one and decreases") {
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\nthe cat sat\nthe sat mat\n");
    TimeBudget budget;
    budget.total_ms = 10000.0;
    TextEnv::Params params;
    TextEnv env(params, fixed_sentence_runner(&stim, 0.9, 2500.0, &budget));
    env.attach_budget(&budget);
    Rng rng(8);
    TextObservation obs = env.reset(&stim, rng);
    CHECK(obs.remaining_time_frac == doctest::Approx(1.0));
    TextStepResult s = env.step({TextAction::Kind::Next, 0}, rng);
    CHECK(s.observation.remaining_time_frac == doctest::Approx(0.75));
}

TEST_CASE("no action is processed after expiry") {
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\nthe cat sat\nthe sat mat\n");
    TimeBudget budget;
    budget.total_ms = 100.0;
    TextEnv::Params params;
    TextEnv env(params, fixed_sentence_runner(&stim, 0.9, 600.0, &budget));
    env.attach_budget(&budget);
    Rng rng(9);
    env.reset(&stim, rng);
    env.step({TextAction::Kind::Next, 0}, rng);  // charges past the limit
    const int read_before = env.sentences_read();
    TextStepResult s = env.step({TextAction::Kind::Next, 0}, rng);
    CHECK(s.done);
    CHECK(s.forced_by_time);
    CHECK(env.sentences_read() == read_before);  // second sentence never ran
}

}  // TEST_SUITE
