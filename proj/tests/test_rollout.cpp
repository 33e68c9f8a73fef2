#include <doctest.h>

#include <cmath>

#include "reader/config.hpp"
#include "reader/datagen.hpp"
#include "reader/rollout.hpp"
#include "reader/trace.hpp"

using namespace reader;

namespace {

struct SmallWorld {
    Lexicon lex = Lexicon::from_counts({{"the", 50.0},
                                        {"cat", 6.0},
                                        {"sat", 5.0},
                                        {"mat", 4.0},
                                        {"dog", 3.0},
                                        {"ran", 2.0},
                                        {"far", 1.0}});
    ContextPredictor predictor = ContextPredictor::train(
        &lex, {{"the", "cat", "sat"}, {"the", "dog", "ran"}, {"cat", "sat", "far"}}, 3, 0.1);
    RunConfig config;

    SimContext ctx() { return config.make_context(&lex, &predictor); }
};

}  // namespace

TEST_SUITE("rollout") {

TEST_CASE("single-word stimulus smoke: fixation, stop, positive comprehension") {
    SmallWorld w;
    w.config.vision.epsilon0 = 0.0;
    w.config.vision.epsilon_slope = 0.0;
    Stimulus stim = Stimulus::from_text("one", "[meta]\n[text]\ncat\n");
    SimContext ctx = w.ctx();
    PolicySet random_policies;  // all levels uniform over valid actions
    bool saw_full_read = false;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        ScanpathTrace trace;
        RolloutOutcome out = run_rollout(ctx, random_policies, stim, TimeBudget{}, seed, &trace);
        bool has_stop = false;
        for (const auto& e : trace.events)
            if (e.level == TraceEvent::Level::Text &&
                (e.action == "stop" || e.action == "expire"))
                has_stop = true;
        CHECK(has_stop);
        if (out.all_read && trace.fixation_count >= 1) {
            saw_full_read = true;
            CHECK(out.comprehension > 0.0);
        }
    }
    CHECK(saw_full_read);  // the read-then-stop path is reachable
}

TEST_CASE("same stimulus and seed give a bit-identical trace") {
    SmallWorld w;
    Stimulus stim = Stimulus::from_text("two", "[meta]\n[text]\nthe cat sat\nthe dog ran\n");
    SimContext ctx = w.ctx();
    PolicySet policies;
    ScanpathTrace t1, t2;
    run_rollout(ctx, policies, stim, TimeBudget{}, 1234, &t1);
    run_rollout(ctx, policies, stim, TimeBudget{}, 1234, &t2);
    CHECK(t1.to_jsonl() == t2.to_jsonl());
}

TEST_CASE("traces validate: timestamps nondecreasing, nesting consistent") {
    SmallWorld w;
    Stimulus stim = Stimulus::from_text("three", "[meta]\n[text]\nthe cat sat\nthe dog ran\n");
    SimContext ctx = w.ctx();
    PolicySet policies;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ScanpathTrace trace;
        run_rollout(ctx, policies, stim, TimeBudget{}, seed, &trace);
        CHECK(validate_trace(trace) == "");
    }
}

TEST_CASE("trace jsonl round-trip") {
    SmallWorld w;
    Stimulus stim = Stimulus::from_text("rt", "[meta]\n[text]\nthe cat sat\n");
    SimContext ctx = w.ctx();
    PolicySet policies;
    ScanpathTrace trace;
    run_rollout(ctx, policies, stim, TimeBudget{}, 5, &trace);
    ScanpathTrace again = ScanpathTrace::from_jsonl(trace.to_jsonl());
    CHECK(again.to_jsonl() == trace.to_jsonl());
}

TEST_CASE("tighter budgets produce fewer fixations (random policies, 100 rollouts)") {
    SmallWorld w;
    // A long text so the 3-second budget truly binds.
    std::string body = "[meta]\n[text]\n";
    for (int s = 0; s < 8; ++s) body += "the cat sat the mat the dog ran\n";
    Stimulus stim = Stimulus::from_text("budget", body);
    SimContext ctx = w.ctx();
    PolicySet policies;
    double fix_short = 0.0, fix_long = 0.0;
    const int n = 100;
    for (int e = 0; e < n; ++e) {
        TimeBudget short_b;
        short_b.total_ms = 3000.0;
        TimeBudget long_b;
        long_b.total_ms = 90000.0;
        ScanpathTrace t1, t2;
        run_rollout(ctx, policies, stim, short_b, 1000 + e, &t1);
        run_rollout(ctx, policies, stim, long_b, 1000 + e, &t2);
        fix_short += t1.fixation_count;
        fix_long += t2.fixation_count;
    }
    CHECK(fix_short < fix_long);
}

TEST_CASE("svg export renders fixations") {
    SmallWorld w;
    Stimulus stim = Stimulus::from_text("svg", "[meta]\n[text]\nthe cat sat\n");
    SimContext ctx = w.ctx();
    PolicySet policies;
    // Deterministically pick a seed whose episode contains a fixation.
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScanpathTrace trace;
        run_rollout(ctx, policies, stim, TimeBudget{}, seed, &trace);
        if (trace.fixation_count == 0) continue;
        const std::string svg = render_scanpath_svg(trace, stim.sentences);
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("circle") != std::string::npos);
        return;
    }
    FAIL("no episode with a fixation in 100 seeds");
}

TEST_CASE("generated world is loadable and self-consistent") {
    datagen::GeneratorOptions opt;
    opt.vocabulary_size = 200;
    opt.corpus_sentences = 100;
    opt.natural_stimuli = 2;
    opt.sentences_per_stimulus = 3;
    datagen::GeneratedWorld world = datagen::generate_world(opt);
    CHECK(world.lexicon.size() >= 200);
    CHECK(world.corpus.size() == 100);
    REQUIRE(world.natural.size() == 2);
    // All stimulus words are in the lexicon.
    for (const auto& stim : world.natural)
        for (const auto& sent : stim.sentences)
            for (const auto& word : sent) CHECK(world.lexicon.contains(word));
    // Gold propositions connect content words of the knowledge text.
    CHECK(!world.knowledge_text.gold_propositions.empty());
    CHECK(world.knowledge_text.knowledge == "high");
    // Write and reload.
    datagen::write_world(world, "rollout_test_world");
    datagen::LoadedWorld loaded = datagen::load_world("rollout_test_world");
    CHECK(loaded.lexicon.size() == world.lexicon.size());
    CHECK(loaded.corpus.size() == world.corpus.size());
    CHECK(loaded.natural.size() == world.natural.size());
    CHECK(loaded.coherent_text.sentences == world.coherent_text.sentences);
}

TEST_CASE("word reading simulation produces covariate-tagged records") {
    SmallWorld w;
    SimContext ctx = w.ctx();
    std::vector<std::vector<std::string>> corpus = {{"the", "cat", "sat"},
                                                    {"the", "dog", "ran"}};
    auto records = simulate_word_reading(ctx, std::nullopt, corpus, 50, 3);
    REQUIRE(records.size() == 50);
    for (const auto& r : records) {
        CHECK(r.length >= 3);
        CHECK(r.fixation_count >= 1);
        CHECK(r.gaze_duration_ms > 0.0);
        CHECK(r.predictability > 0.0);
    }
}

}  // TEST_SUITE
