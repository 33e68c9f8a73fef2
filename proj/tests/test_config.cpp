#include <doctest.h>

#include "reader/config.hpp"
#include "reader/errors.hpp"

using namespace reader;

TEST_SUITE("config") {

TEST_CASE("defaults pass validation") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("serialize-parse-serialize is byte-identical") {
    RunConfig c;
    c.duration.kappa = 3.25;
    c.memory.tau_high = 0.8381;
    c.time.total_ms = 30000.0;
    c.train.updates = 123;
    c.sim.svg = true;
    const std::string once = c.serialize();
    RunConfig parsed = RunConfig::parse(once);
    CHECK(parsed.serialize() == once);
    CHECK(parsed.duration.kappa == c.duration.kappa);
    CHECK(parsed.memory.tau_high == c.memory.tau_high);
    CHECK(parsed.sim.svg == c.sim.svg);
}

TEST_CASE("bounds are enforced") {
    RunConfig c;
    c.duration.kappa = 5.0;  // outside (2,4)
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.duration.rho = 0.5;  // outside [0.1,0.3]
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.vision.n_fov = 12;  // outside [7,9] unless full vision
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.ablation.full_vision = true;
    CHECK_NOTHROW(c.validate());
    c = RunConfig{};
    c.time.w_rp = 5.0;  // outside [0,3]
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.rewards.w_reg = 1.5;  // outside [0,1]
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("malformed config text raises ConfigError") {
    CHECK_THROWS_AS(RunConfig::parse("[duration\nkappa = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[duration]\nkappa 2.5\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[duration]\nkappa = abc\n"), ConfigError);
}

TEST_CASE("knowledge condition selects the matching threshold") {
    RunConfig c;
    Lexicon lex = Lexicon::from_counts({{"aa", 1.0}});
    ContextPredictor pred(&lex, 2, 0.1);
    CHECK(c.make_context(&lex, &pred, "high").text_params.tau == doctest::Approx(0.838));
    CHECK(c.make_context(&lex, &pred, "low").text_params.tau == doctest::Approx(0.844));
    CHECK(c.make_context(&lex, &pred, "").text_params.tau == doctest::Approx(0.32));
}

TEST_CASE("ablations flow into the context") {
    RunConfig c;
    c.ablation.unlimited_memory = true;
    Lexicon lex = Lexicon::from_counts({{"aa", 1.0}});
    ContextPredictor pred(&lex, 2, 0.1);
    SimContext ctx = c.make_context(&lex, &pred);
    CHECK(ctx.text_params.tau == doctest::Approx(0.0));
    CHECK(ctx.text_params.c_stm > 1000);

    RunConfig v;
    v.ablation.full_vision = true;
    SimContext vctx = v.make_context(&lex, &pred);
    CHECK(vctx.word_params.acuity.epsilon0 == doctest::Approx(0.0));
    CHECK(vctx.word_params.acuity.n_fov >= 64);
}

}  // TEST_SUITE
