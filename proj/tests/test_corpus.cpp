#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "reader/corpus.hpp"
#include "reader/errors.hpp"
#include "reader/rng.hpp"

using namespace reader;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("corpus_test_") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

// Independent back-off oracle: longest observed suffix with add-k smoothing,
// empty context = lexicon prior.
double backoff_oracle(const std::vector<std::vector<std::string>>& corpus, const Lexicon& lex,
                      int order, double k, std::vector<std::string> context,
                      const std::string& word) {
    const double v = static_cast<double>(lex.size());
    if (static_cast<int>(context.size()) > order - 1)
        context.erase(context.begin(), context.end() - (order - 1));
    while (!context.empty()) {
        double ctx_total = 0.0, joint = 0.0;
        for (const auto& sent : corpus)
            for (std::size_t i = 0; i + context.size() < sent.size(); ++i) {
                bool match = true;
                for (std::size_t j = 0; j < context.size(); ++j)
                    if (sent[i + j] != context[j]) match = false;
                if (!match) continue;
                if (!lex.contains(sent[i + context.size()])) continue;
                ctx_total += 1.0;
                if (sent[i + context.size()] == word) joint += 1.0;
            }
        if (ctx_total > 0.0) return (joint + k) / (ctx_total + k * v);
        context.erase(context.begin());
    }
    return lex.prior(word);
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("lexicon normalization from counts") {
    Lexicon lex = Lexicon::from_counts({{"a", 1.0}, {"b", 1.0}, {"c", 2.0}});
    CHECK(lex.prior("a") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(lex.prior("b") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(lex.prior("c") == doctest::Approx(0.5).epsilon(1e-12));
    double total = 0.0;
    for (std::size_t i = 0; i < lex.size(); ++i) total += lex.entry_at(i).prior;
    CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("single-entry lexicon gets prior one and log10 frequency") {
    const std::string path = write_temp("single.tsv", "the\t29449\n");
    Lexicon lex = Lexicon::load(path);
    CHECK(lex.prior("the") == doctest::Approx(1.0));
    CHECK(lex.entry("the").log10_freq == doctest::Approx(std::log10(29449.0)).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("non-numeric count raises ParseError") {
    const std::string path = write_temp("bad.tsv", "word\tNaN\n");
    CHECK_THROWS_AS(Lexicon::load(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("empty lexicon file raises LexiconEmpty") {
    const std::string path = write_temp("empty.tsv", "# only a comment\n");
    CHECK_THROWS_AS(Lexicon::load(path), LexiconEmpty);
    std::remove(path.c_str());
}

TEST_CASE("duplicate words merge by summing counts") {
    Lexicon lex = Lexicon::from_counts({{"cat", 1.0}, {"Cat", 3.0}});
    CHECK(lex.size() == 1);
    CHECK(lex.entry("cat").count_per_million == doctest::Approx(4.0));
}

TEST_CASE("lexicon save/load round-trip reproduces priors bit-for-bit") {
    Lexicon lex = Lexicon::from_counts({{"alpha", 1.7}, {"beta", 2.9}, {"gamma", 0.31}});
    const std::string path = "corpus_test_roundtrip.tsv";
    lex.save(path);
    Lexicon again = Lexicon::load(path);
    REQUIRE(again.size() == lex.size());
    for (std::size_t i = 0; i < lex.size(); ++i) {
        CHECK(again.word(i) == lex.word(i));
        CHECK(again.entry_at(i).prior == lex.entry_at(i).prior);  // exact
        CHECK(again.entry_at(i).log10_freq == lex.entry_at(i).log10_freq);
    }
    std::remove(path.c_str());
}

TEST_CASE("bigram add-k probability matches hand count") {
    // corpus "a b a b": context "a" continues to "b" twice; V = 2.
    Lexicon lex = Lexicon::from_counts({{"a", 1.0}, {"b", 1.0}});
    const double k = 0.1;
    ContextPredictor p = ContextPredictor::train(&lex, {{"a", "b", "a", "b"}}, 2, k);
    const double expect = (2.0 + k) / (2.0 + k * 2.0);
    CHECK(p.predictability({"a"}, "b") == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("empty context returns the lexicon prior exactly") {
    Lexicon lex = Lexicon::from_counts({{"a", 3.0}, {"b", 1.0}});
    ContextPredictor p = ContextPredictor::train(&lex, {{"a", "b", "a"}}, 3, 0.1);
    const std::vector<double> dist = p.predict({});
    CHECK(dist[*lex.find("a")] == lex.prior("a"));
    CHECK(dist[*lex.find("b")] == lex.prior("b"));
}

TEST_CASE("unseen context backs off, ultimately to the prior") {
    Lexicon lex = Lexicon::from_counts({{"a", 3.0}, {"b", 1.0}, {"c", 1.0}});
    std::vector<std::vector<std::string>> corpus = {{"a", "b", "c", "a", "b"}};
    ContextPredictor p = ContextPredictor::train(&lex, corpus, 3, 0.1);
    // "c b" never seen as a bigram context; the oracle backs off to "b".
    for (const auto& w : {"a", "b", "c"}) {
        const double expect = backoff_oracle(corpus, lex, 3, 0.1, {"c", "b"}, w);
        CHECK(p.predictability({"c", "b"}, w) == doctest::Approx(expect).epsilon(1e-12));
    }
    // A context of entirely unknown words falls through to the prior.
    CHECK(p.predictability({"zzz", "qqq"}, "a") == doctest::Approx(lex.prior("a")));
}

TEST_CASE("empty corpus degenerates to the lexicon prior") {
    Lexicon lex = Lexicon::from_counts({{"a", 3.0}, {"b", 1.0}});
    ContextPredictor p = ContextPredictor::train(&lex, {}, 3, 0.1);
    CHECK(p.predictability({"a"}, "b") == doctest::Approx(lex.prior("b")));
}

TEST_CASE("prediction normalizes over the lexicon for random corpora") {
    Rng rng(42);
    const std::vector<std::string> vocab = {"ba", "ce", "di", "fo", "gu", "ha"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<std::string, double>> counts;
        for (const auto& w : vocab) counts.emplace_back(w, 1.0 + rng.uniform() * 5.0);
        Lexicon lex = Lexicon::from_counts(counts);
        std::vector<std::vector<std::string>> corpus;
        for (int s = 0; s < 10; ++s) {
            std::vector<std::string> sent;
            const std::size_t len = 2 + rng.index(6);
            for (std::size_t i = 0; i < len; ++i) sent.push_back(vocab[rng.index(vocab.size())]);
            corpus.push_back(sent);
        }
        ContextPredictor p = ContextPredictor::train(&lex, corpus, 3, 0.2);
        std::vector<std::string> context = {vocab[rng.index(vocab.size())],
                                            vocab[rng.index(vocab.size())]};
        const std::vector<double> dist = p.predict(context);
        double total = 0.0;
        for (double d : dist) total += d;
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("add-k monotonicity: more corpus evidence never lowers probability") {
    Rng rng(7);
    const std::vector<std::string> vocab = {"ba", "ce", "di", "fo"};
    std::vector<std::pair<std::string, double>> counts;
    for (const auto& w : vocab) counts.emplace_back(w, 1.0);
    Lexicon lex = Lexicon::from_counts(counts);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<std::string>> corpus;
        for (int s = 0; s < 6; ++s) {
            std::vector<std::string> sent;
            for (int i = 0; i < 4; ++i) sent.push_back(vocab[rng.index(vocab.size())]);
            corpus.push_back(sent);
        }
        ContextPredictor before = ContextPredictor::train(&lex, corpus, 2, 0.1);
        const double p_before = before.predictability({"ba"}, "ce");
        corpus.push_back({"ba", "ce"});  // one more observation of the continuation
        ContextPredictor after = ContextPredictor::train(&lex, corpus, 2, 0.1);
        CHECK(after.predictability({"ba"}, "ce") >= p_before - 1e-12);
    }
}

TEST_CASE("unknown word raises UnknownWord") {
    Lexicon lex = Lexicon::from_counts({{"a", 1.0}});
    ContextPredictor p = ContextPredictor::train(&lex, {}, 2, 0.1);
    CHECK_THROWS_AS(p.predictability({}, "zzzz"), UnknownWord);
}

TEST_CASE("stimulus parses sections") {
    const std::string body =
        "[meta]\n"
        "id = demo\n"
        "title = Demo Text\n"
        "[text]\n"
        "The cat sat.\n"
        "A dog ran!\n"
        "[propositions]\n"
        "cat|rel|sat\n"
        "[predictability]\n"
        "0 1 0.25\n";
    Stimulus s = Stimulus::from_text("x", body);
    CHECK(s.id == "demo");
    REQUIRE(s.sentence_count() == 2);
    CHECK(s.sentences[0] == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(s.sentences[1] == std::vector<std::string>{"a", "dog", "ran"});
    REQUIRE(s.gold_propositions.size() == 1);
    CHECK(s.gold_propositions[0][0] == "cat");
    CHECK(*s.predictability_override(0, 1) == doctest::Approx(0.25));
    CHECK(!s.predictability_override(1, 0).has_value());
}

TEST_CASE("stimulus with empty body raises StimulusEmpty") {
    CHECK_THROWS_AS(Stimulus::from_text("x", "[meta]\nid = empty\n[text]\n"), StimulusEmpty);
}

TEST_CASE("malformed section header raises ParseError") {
    CHECK_THROWS_AS(Stimulus::from_text("x", "[meta\nid = bad\n"), ParseError);
    CHECK_THROWS_AS(Stimulus::from_text("x", "[bogus]\n"), ParseError);
}

TEST_CASE("stimulus save/load round-trip") {
    const std::string body =
        "[meta]\nid = rt\nknowledge = high\n[text]\nthe brivon was near the dalmer\n"
        "[propositions]\nbrivon|rel|dalmer\n";
    Stimulus s = Stimulus::from_text("x", body);
    const std::string path = "corpus_test_rt.stim";
    s.save(path);
    Stimulus again = Stimulus::load(path);
    CHECK(again.id == "rt");
    CHECK(again.knowledge == "high");
    CHECK(again.sentences == s.sentences);
    CHECK(again.gold_propositions == s.gold_propositions);
    std::remove(path.c_str());
}

TEST_CASE("word normalization keeps contractions, strips punctuation") {
    CHECK(normalize_word("Hello,") == "hello");
    CHECK(normalize_word("don't") == "don't");
    CHECK(normalize_word("\"Quoted\"") == "quoted");
    CHECK(normalize_word("123") == "");
    CHECK(normalize_word("--") == "");
}

}  // TEST_SUITE
