#include <doctest.h>

#include <cmath>

#include "reader/config.hpp"
#include "reader/errors.hpp"
#include "reader/metrics.hpp"

using namespace reader;
using namespace reader::eval;

namespace {

TraceEvent text_event(const std::string& action, int sentence, double t) {
    TraceEvent e;
    e.level = TraceEvent::Level::Text;
    e.action = action;
    e.sentence = sentence;
    e.cum_ms = t;
    return e;
}

TraceEvent sentence_event(const std::string& action, int s, int w, double t) {
    TraceEvent e;
    e.level = TraceEvent::Level::Sentence;
    e.action = action;
    e.sentence = s;
    e.word = w;
    e.cum_ms = t;
    return e;
}

TraceEvent fixation(int s, int w, int letter, double dur, double t) {
    TraceEvent e;
    e.level = TraceEvent::Level::Word;
    e.action = "fixate";
    e.sentence = s;
    e.word = w;
    e.letter = letter;
    e.duration_ms = dur;
    e.cum_ms = t;
    return e;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("ols recovers exact lines and flags degenerate inputs") {
    LinearFit fit = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});  // y = 2x + 1
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

    LinearFit flat = linear_fit({1, 2, 3}, {4, 4, 4});
    CHECK(flat.beta == doctest::Approx(0.0));
    CHECK(flat.r2 == doctest::Approx(0.0));

    CHECK_THROWS_AS(linear_fit({2, 2, 2}, {1, 2, 3}), DegenerateFit);
}

TEST_CASE("ols recovers planted slopes on noiseless synthetic data to 1e-10") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double beta = rng.uniform(-20.0, 20.0);
        const double intercept = rng.uniform(-5.0, 5.0);
        std::vector<double> x, y;
        for (int i = 0; i < 12; ++i) {
            x.push_back(rng.uniform(0.0, 10.0));
            y.push_back(beta * x.back() + intercept);
        }
        LinearFit fit = linear_fit(x, y);
        CHECK(std::abs(fit.beta - beta) < 1e-10);
        CHECK(std::abs(fit.intercept - intercept) < 1e-10);
    }
}

TEST_CASE("logit clamps to the configured range") {
    CHECK(logit(0.5) == doctest::Approx(0.0));
    CHECK(logit(0.0) == doctest::Approx(std::log(0.001 / 0.999)));
    CHECK(logit(1.0) == doctest::Approx(std::log(0.999 / 0.001)));
}

TEST_CASE("skip and regression derivation from a hand-built trace") {
    Lexicon lex = Lexicon::from_counts({{"the", 10.0}, {"cat", 2.0}, {"sat", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    RunConfig config;
    SimContext ctx = config.make_context(&lex, &predictor);
    Stimulus stim = Stimulus::from_text("m", "[meta]\n[text]\nthe cat sat\n");

    // Episode: fixate w0, skip w1, fixate w2, regress-fixate w1.
    ScanpathTrace trace;
    trace.total_ms = 2000.0;
    trace.fixation_count = 3;
    trace.events.push_back(text_event("read", 0, 0.0));
    trace.events.push_back(fixation(0, 0, 1, 200.0, 250.0));
    trace.events.push_back(sentence_event("next", 0, 0, 250.0));
    trace.events.push_back(sentence_event("skip", 0, 1, 300.0));
    trace.events.push_back(fixation(0, 2, 0, 210.0, 600.0));
    trace.events.push_back(sentence_event("next", 0, 2, 600.0));
    trace.events.push_back(fixation(0, 1, 0, 190.0, 900.0));
    trace.events.push_back(sentence_event("regress", 0, 1, 900.0));
    trace.events.push_back(sentence_event("stop", 0, -1, 950.0));
    trace.events.push_back(text_event("appraise", 0, 950.0));
    trace.events.push_back(text_event("stop", -1, 1000.0));

    MetricTable table = compute_metrics({trace}, stim, ctx);
    REQUIRE(table.words.size() == 3);
    const auto& w0 = table.words[0];
    const auto& w1 = table.words[1];
    const auto& w2 = table.words[2];
    CHECK(!w0.skipped);
    CHECK(w0.gaze_duration_ms == doctest::Approx(200.0));
    CHECK(!w0.regressed_into);
    // Word 1: no first-pass fixation (skip), later refixated = regression.
    CHECK(w1.skipped);
    CHECK(w1.regressed_into);
    // Word 2: fixated once, never regressed into.
    CHECK(!w2.skipped);
    CHECK(!w2.regressed_into);
    REQUIRE(table.episodes.size() == 1);
    CHECK(table.episodes[0].skip_rate == doctest::Approx(1.0 / 3.0));
    CHECK(table.episodes[0].regression_rate == doctest::Approx(1.0 / 3.0));
    // Saccade amplitude: letter offsets are "the cat sat" -> starts 0,4,8.
    // Fixations at 0+1, 8+0, 4+0 -> amplitudes |8-1|=7, |4-8|=4.
    CHECK(table.episodes[0].mean_saccade_letters == doctest::Approx((7.0 + 4.0) / 2.0));
}

TEST_CASE("every word fixated once gives zero skip rate") {
    Lexicon lex = Lexicon::from_counts({{"aa", 1.0}, {"bb", 1.0}});
    ContextPredictor predictor(&lex, 2, 0.1);
    RunConfig config;
    SimContext ctx = config.make_context(&lex, &predictor);
    Stimulus stim = Stimulus::from_text("m", "[meta]\n[text]\naa bb\n");
    ScanpathTrace trace;
    trace.total_ms = 600.0;
    trace.events.push_back(text_event("read", 0, 0.0));
    trace.events.push_back(fixation(0, 0, 0, 200.0, 250.0));
    trace.events.push_back(sentence_event("next", 0, 0, 250.0));
    trace.events.push_back(fixation(0, 1, 0, 200.0, 500.0));
    trace.events.push_back(sentence_event("next", 0, 1, 500.0));
    trace.events.push_back(sentence_event("stop", 0, -1, 550.0));
    trace.events.push_back(text_event("appraise", 0, 550.0));
    trace.events.push_back(text_event("stop", -1, 600.0));
    MetricTable table = compute_metrics({trace}, stim, ctx);
    CHECK(table.episodes[0].skip_rate == doctest::Approx(0.0));
    CHECK(table.episodes[0].regression_rate == doctest::Approx(0.0));
}

TEST_CASE("quantile binning splits evenly and drops small bins") {
    std::vector<double> keys, values;
    for (int i = 0; i < 60; ++i) {
        keys.push_back(i);
        values.push_back(2.0 * i);
    }
    BinnedCurve curve = bin_means(keys, values, 6);
    CHECK(curve.x.size() == 6);
    LinearFit fit = fit_curve(curve);
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("metric summary json round-trip") {
    MetricSummary s;
    s.gd_by_length.x = {3.0, 5.0};
    s.gd_by_length.mean = {210.0, 260.0};
    s.gd_by_length.var = {4.0, 5.0};
    s.gd_by_length.count = {100, 90};
    s.recall_high = 0.47;
    s.recall_low = 0.31;
    TimePressureCell cell;
    cell.condition_ms = 30000.0;
    cell.wpm = 192.0;
    cell.wpm_sd = 56.0;
    s.time_pressure.push_back(cell);
    MetricSummary back = MetricSummary::from_json_text(s.to_json());
    CHECK(back.gd_by_length.mean[1] == doctest::Approx(260.0));
    CHECK(back.recall_high == doctest::Approx(0.47));
    CHECK(back.recall_low == doctest::Approx(0.31));
    REQUIRE(back.time_pressure.size() == 1);
    CHECK(back.time_pressure[0].wpm == doctest::Approx(192.0));
}

}  // TEST_SUITE
