#include <doctest.h>

#include <cmath>

#include "reader/errors.hpp"
#include "reader/sentence_reader.hpp"

using namespace reader;

namespace {

// Word runner that always recognizes the word correctly with one fixation.
WordRunner perfect_word_runner(const Stimulus* stim, const int* sentence) {
    return [stim, sentence](int word_index, const std::vector<double>&, Rng& rng) {
        WordEpisodeResult r;
        r.committed =
            stim->sentences[static_cast<std::size_t>(*sentence)][static_cast<std::size_t>(word_index)];
        r.correct = true;
        WordFixation fix;
        fix.letter = 0;
        fix.dH_bits = 0.5;
        fix.duration_ms = 200.0 + rng.uniform();
        r.fixations.push_back(fix);
        return r;
    };
}

struct Fixture {
    Lexicon lex = Lexicon::from_counts(
        {{"the", 50.0}, {"cat", 5.0}, {"sat", 4.0}, {"mat", 3.0}, {"dog", 2.0}, {"ran", 1.0}});
    ContextPredictor predictor{&lex, 3, 0.1};
    Stimulus stim = Stimulus::from_text("t", "[meta]\nid = t\n[text]\nthe cat sat the mat\n");
    int sentence = 0;

    SentenceEnv make_env(SentenceEnv::Params params = {}) {
        return SentenceEnv(&lex, &predictor, params, perfect_word_runner(&stim, &sentence));
    }
};

}  // namespace

TEST_SUITE("sentence_reader") {

TEST_CASE("appraisal closed forms") {
    Lexicon lex = Lexicon::from_counts({{"a", 1.0}});
    ContextPredictor p(&lex, 2, 0.1);
    AppraisalConfig cfg;
    cfg.surprisal_scale = 8.0;
    // P = 1 -> psi = 1.
    CHECK(appraise_word("a", {}, p, cfg, 1.0) == doctest::Approx(1.0));
    // P = 0.25, scale 8 -> exp(-2/8).
    CHECK(appraise_word("a", {}, p, cfg, 0.25) ==
          doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
    // P -> 0 drives psi toward 0.
    CHECK(appraise_word("a", {}, p, cfg, 1e-12) < 0.01);
    CHECK(appraise_word("a", {}, p, cfg, 1e-30) < appraise_word("a", {}, p, cfg, 1e-12));
}

TEST_CASE("geometric mean closed forms") {
    CHECK(geometric_mean({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(geometric_mean({1.0, 0.25}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(geometric_mean({0.7, 0.0}) == doctest::Approx(0.0));
    CHECK(geometric_mean({}) == doctest::Approx(0.0));
}

TEST_CASE("comprehension score floors unset entries") {
    std::vector<std::optional<double>> psi = {1.0, std::nullopt, 1.0};
    CHECK(comprehension_score(psi, 0.01) ==
          doctest::Approx(std::cbrt(0.01)).epsilon(1e-9));
}

TEST_CASE("geometric mean never exceeds the arithmetic mean") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> vals;
        const std::size_t n = 1 + rng.index(8);
        double arith = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            vals.push_back(rng.uniform());
            arith += vals.back();
        }
        arith /= static_cast<double>(n);
        CHECK(geometric_mean(vals) <= arith + 1e-12);
    }
}

TEST_CASE("fusion: empty preview reduces to the contextual prediction") {
    Lexicon lex = Lexicon::from_counts({{"aa", 4.0}, {"ab", 3.0}, {"ba", 2.0}, {"bb", 1.0}});
    ContextPredictor p(&lex, 2, 0.1);
    AcuityConfig cfg;
    WordBelief b = fuse_next_word_belief(LetterObservation{}, p, {}, cfg);
    // Likelihood 1 everywhere: belief = prior restricted to top 5.
    CHECK(b.candidates[0].word == "aa");
    CHECK(b.candidates[0].prob == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("fusion: uniform prediction leaves the letter likelihood") {
    Lexicon lex = Lexicon::from_counts({{"aa", 1.0}, {"ba", 1.0}});
    ContextPredictor p(&lex, 2, 0.1);
    AcuityConfig cfg;
    cfg.epsilon0 = 0.1;
    cfg.epsilon_slope = 0.0;
    LetterObservation preview;
    preview.word_len = 2;
    preview.slots = {{0, 'a', 0.0}};
    WordBelief b = fuse_next_word_belief(preview, p, {}, cfg);
    // P(aa) ~ 0.9, P(ba) ~ 0.1/25; normalized.
    const double expect = 0.9 / (0.9 + 0.1 / 25.0);
    CHECK(b.mass_on("aa") == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("fusion: three-word product matches the hand computation") {
    Lexicon lex = Lexicon::from_counts({{"aa", 2.0}, {"ab", 1.0}, {"ac", 1.0}});
    ContextPredictor p = ContextPredictor::train(&lex, {{"aa", "ab", "aa", "ac"}}, 2, 0.5);
    AcuityConfig cfg;
    cfg.epsilon0 = 0.2;
    cfg.epsilon_slope = 0.0;
    LetterObservation preview;
    preview.word_len = 2;
    preview.slots = {{1, 'b', 0.0}};
    // Oracle: lm(w) * lik(w), normalized over the lexicon.
    const std::vector<double> lm = p.predict({"aa"});
    std::vector<double> weights(3);
    const std::vector<std::string> words = {"aa", "ab", "ac"};
    for (std::size_t i = 0; i < 3; ++i)
        weights[i] = lm[i] * observation_likelihood(preview, words[i], cfg);
    const double z = weights[0] + weights[1] + weights[2];
    WordBelief b = fuse_next_word_belief(preview, p, {"aa"}, cfg);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(b.mass_on(words[i]) == doctest::Approx(weights[i] / z).epsilon(1e-12));
}

TEST_CASE("full pass then stop earns the scaled comprehension reward") {
    Fixture f;
    SentenceEnv env = f.make_env();
    Rng rng(9);
    env.reset(&f.stim, 0, rng);
    double total_psi_product = 1.0;
    int words = env.n();
    for (int w = 0; w < words; ++w) {
        SentenceStepResult s = env.step({SentenceAction::Kind::Next, 0}, rng);
        CHECK(s.reward == doctest::Approx(-0.1));
        total_psi_product *= s.psi;
    }
    SentenceStepResult stop = env.step({SentenceAction::Kind::Stop, 0}, rng);
    CHECK(stop.done);
    CHECK(stop.all_read);
    const double score = std::pow(total_psi_product, 1.0 / words);
    CHECK(stop.final_score == doctest::Approx(score).epsilon(1e-9));
    CHECK(stop.reward == doctest::Approx(100.0 * score).epsilon(1e-9));
}

TEST_CASE("premature stop fails with the large negative reward") {
    Fixture f;
    SentenceEnv env = f.make_env();
    Rng rng(9);
    env.reset(&f.stim, 0, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    SentenceStepResult stop = env.step({SentenceAction::Kind::Stop, 0}, rng);
    CHECK(stop.done);
    CHECK(!stop.all_read);
    CHECK(stop.reward == doctest::Approx(-100.0));
}

TEST_CASE("regress cost scales with w_reg and boosts the target appraisal") {
    Fixture f;
    SentenceEnv::Params params;
    params.w_reg = 0.8;
    SentenceEnv env = f.make_env(params);
    Rng rng(10);
    env.reset(&f.stim, 0, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    SentenceStepResult second = env.step({SentenceAction::Kind::Next, 0}, rng);
    const double psi_before = *env.psi()[0];
    SentenceStepResult reg = env.step({SentenceAction::Kind::Regress, 1}, rng);
    CHECK(reg.reward == doctest::Approx(-0.08).epsilon(1e-12));
    CHECK(reg.word_index == 0);
    const double boosted = psi_before + 0.3 * (1.0 - psi_before);
    CHECK(*env.psi()[0] == doctest::Approx(boosted).epsilon(1e-12));
    CHECK(reg.psi == doctest::Approx(boosted));
    (void)second;
}

TEST_CASE("regress strictly increases psi below one") {
    Fixture f;
    SentenceEnv env = f.make_env();
    Rng rng(11);
    env.reset(&f.stim, 0, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    for (int i = 0; i < 5; ++i) {
        const double before = *env.psi()[0];
        env.step({SentenceAction::Kind::Regress, 5}, rng);  // clamps to word 0
        if (before < 1.0) CHECK(*env.psi()[0] > before);
        // Walk forward again so regress stays valid.
        env.step({SentenceAction::Kind::Next, 0}, rng);
    }
}

TEST_CASE("regress with no prior words raises InvalidAction") {
    Fixture f;
    SentenceEnv env = f.make_env();
    Rng rng(12);
    env.reset(&f.stim, 0, rng);
    CHECK(!env.can_regress());
    CHECK_THROWS_AS(env.step({SentenceAction::Kind::Regress, 1}, rng), InvalidAction);
}

TEST_CASE("skip of a perfectly predicted word equals next with psi = 1") {
    // One-word lexicon of matching length makes b_next(truth) = 1.
    Lexicon lex = Lexicon::from_counts({{"cat", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    Stimulus stim = Stimulus::from_text("t", "[meta]\n[text]\ncat cat\n");
    int sentence = 0;
    SentenceEnv env(&lex, &predictor, SentenceEnv::Params{},
                    perfect_word_runner(&stim, &sentence));
    Rng rng(13);
    env.reset(&stim, 0, rng);
    SentenceStepResult skip = env.step({SentenceAction::Kind::Skip, 0}, rng);
    CHECK(skip.skipped);
    CHECK(skip.psi == doctest::Approx(1.0).epsilon(1e-9));
    SentenceStepResult next = env.step({SentenceAction::Kind::Next, 0}, rng);
    CHECK(next.psi == doctest::Approx(1.0).epsilon(1e-9));
    SentenceStepResult stop = env.step({SentenceAction::Kind::Stop, 0}, rng);
    CHECK(stop.final_score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("episode return decomposes into step costs plus terminal") {
    Fixture f;
    SentenceEnv env = f.make_env();
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        env.reset(&f.stim, 0, rng);
        double ret = 0.0, steps_cost = 0.0, terminal = 0.0;
        while (!env.done()) {
            SentenceAction a;
            const double u = rng.uniform();
            if (u < 0.4 && env.can_next()) a.kind = SentenceAction::Kind::Next;
            else if (u < 0.55 && env.can_next()) a.kind = SentenceAction::Kind::Skip;
            else if (u < 0.7 && env.can_regress()) {
                a.kind = SentenceAction::Kind::Regress;
                a.regress_offset = 1 + static_cast<int>(rng.index(5));
            } else a.kind = SentenceAction::Kind::Stop;
            SentenceStepResult s = env.step(a, rng);
            ret += s.reward;
            if (s.done) terminal = s.reward;
            else steps_cost += s.reward;
        }
        CHECK(ret == doctest::Approx(steps_cost + terminal).epsilon(1e-9));
    }
}

TEST_CASE("step-cap truncation ends the episode with the failure penalty") {
    Fixture f;
    SentenceEnv::Params params;
    params.max_steps_per_word = 1;  // max_steps = n + 10
    SentenceEnv env = f.make_env(params);
    Rng rng(21);
    env.reset(&f.stim, 0, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    env.step({SentenceAction::Kind::Next, 0}, rng);
    // Ping-pong regress/re-read until the cap forces a stop mid-sentence.
    SentenceStepResult last;
    while (!env.done()) {
        last = env.step({SentenceAction::Kind::Regress, 1}, rng);
        if (!env.done()) last = env.step({SentenceAction::Kind::Next, 0}, rng);
    }
    CHECK(last.done);
    CHECK(!last.all_read);
    CHECK(last.reward == doctest::Approx(-100.0));
}

}  // TEST_SUITE
