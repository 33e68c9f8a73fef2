#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace reader {

// Vocabulary with frequency priors. Entries are keyed by normalized
// (lowercase, punctuation-stripped) word forms; priors always sum to 1.
class Lexicon {
public:
    struct Entry {
        double count_per_million = 0.0;
        double log10_freq = 0.0;  // log10 of count-per-million
        double prior = 0.0;       // normalized frequency prior
        int length = 0;
    };

    // Parses `word<TAB>count-per-million` rows; '#' starts a comment line.
    // Duplicate words are merged by summing counts.
    static Lexicon load(const std::string& path);
    static Lexicon from_counts(const std::vector<std::pair<std::string, double>>& counts);

    void save(const std::string& path) const;

    bool contains(const std::string& w) const { return index_.count(w) != 0; }
    const Entry& entry(const std::string& w) const;
    double prior(const std::string& w) const { return entry(w).prior; }

    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const std::string& word(std::size_t i) const { return words_[i]; }
    const Entry& entry_at(std::size_t i) const { return entries_[i]; }
    std::optional<std::size_t> find(const std::string& w) const;

private:
    void finalize();

    std::vector<std::string> words_;   // sorted, unique
    std::vector<Entry> entries_;       // parallel to words_
    std::unordered_map<std::string, std::size_t> index_;
};

// Add-k smoothed n-gram predictor over the lexicon vocabulary. Contexts
// back off suffix-by-suffix; the empty context is the lexicon prior exactly.
class ContextPredictor {
public:
    ContextPredictor(const Lexicon* lexicon, int order, double add_k);

    // Accumulates n-gram counts from a token stream (sentence boundaries
    // are handled by the caller feeding one sentence at a time).
    void observe_sentence(const std::vector<std::string>& tokens);

    static ContextPredictor train(const Lexicon* lexicon,
                                  const std::vector<std::vector<std::string>>& corpus,
                                  int order, double add_k);

    // Normalized distribution over the whole lexicon, indexed like
    // Lexicon::words(). Uses at most order-1 trailing context tokens.
    std::vector<double> predict(const std::vector<std::string>& context) const;

    // P(word | context); throws UnknownWord if word is not in the lexicon.
    double predictability(const std::vector<std::string>& context, const std::string& word) const;

    int order() const { return order_; }
    double add_k() const { return add_k_; }
    const Lexicon& lexicon() const { return *lexicon_; }

private:
    const Lexicon* lexicon_;
    int order_;
    double add_k_;
    // context key ("w1 w2") -> (continuation word index -> count); per-level totals.
    std::vector<std::unordered_map<std::string, std::unordered_map<std::size_t, double>>> counts_;
    std::vector<std::unordered_map<std::string, double>> totals_;
};

struct Proposition;  // defined in text_reader.hpp

// One experimental text: sentences of normalized words plus optional gold
// propositions and a per-word predictability override table.
struct Stimulus {
    std::string id;
    std::string title;
    std::string knowledge;  // "", "high" or "low" (picks tau_high/tau_low)
    std::vector<std::vector<std::string>> sentences;          // normalized
    std::vector<std::vector<std::string>> surface_sentences;  // as written
    std::vector<std::array<std::string, 3>> gold_propositions;  // subject, relation, object
    // (sentence, word) -> cloze probability; overrides the n-gram predictor.
    std::map<std::pair<int, int>, double> predictability_table;

    std::size_t sentence_count() const { return sentences.size(); }
    std::size_t word_count() const;
    std::optional<double> predictability_override(int sentence, int word) const;

    static Stimulus load(const std::string& path);
    static Stimulus from_text(const std::string& id, const std::string& body);
    void save(const std::string& path) const;
};

// Lowercases, strips surrounding punctuation, keeps internal apostrophes.
// Returns an empty string when nothing alphabetic remains.
std::string normalize_word(const std::string& raw);
std::vector<std::string> tokenize_sentence(const std::string& line);

}  // namespace reader
