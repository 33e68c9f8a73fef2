#include "reader/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "reader/errors.hpp"
#include "reader/rng.hpp"
#include "reader/text_reader.hpp"

namespace reader::datagen {

namespace {

const std::vector<std::string> kFunctionWords = {
    "the", "a",  "of", "to",   "and", "in", "on",   "was", "is",
    "at",  "it", "as", "with", "for", "by", "near", "that", "this"};

const std::string kVowels = "aeiou";
const std::string kConsonants = "bcdfghjklmnprstvwz";

std::string make_pseudo_word(int length, Rng& rng) {
    std::string w;
    bool vowel = rng.bernoulli(0.35);
    while (static_cast<int>(w.size()) < length) {
        const std::string& pool = vowel ? kVowels : kConsonants;
        w.push_back(pool[rng.index(pool.size())]);
        // Mostly alternate, with occasional doubled class for texture.
        if (rng.bernoulli(0.85)) vowel = !vowel;
    }
    return w;
}

// Connector pattern pieces; all of them are stopwords so proposition
// extraction sees exactly the content chain.
const std::vector<std::string> kConnectors = {"was near", "was with", "is at", "was in",
                                              "is on",    "was by",   "is near"};

std::string connector(Rng& rng) { return kConnectors[rng.index(kConnectors.size())]; }

}  // namespace

GeneratedWorld generate_world(const GeneratorOptions& opt) {
    Rng rng(Rng::splitmix64(opt.seed));
    GeneratedWorld world;

    // ---- Lexicon: function words on top ranks, pseudo-words below ----
    std::vector<std::pair<std::string, double>> counts;
    std::unordered_set<std::string> used;
    const int n_function = std::min<int>(opt.function_words, static_cast<int>(kFunctionWords.size()));
    const int total = std::max(opt.vocabulary_size, n_function + 50);
    for (int rank = 1; rank <= total; ++rank) {
        std::string word;
        if (rank <= n_function) {
            word = kFunctionWords[static_cast<std::size_t>(rank - 1)];
        } else {
            // Length grows with rank so short words are frequent.
            const double frac = static_cast<double>(rank) / total;
            const double mean_len = 3.0 + 6.0 * std::pow(frac, 0.7);
            int len = static_cast<int>(std::lround(rng.normal(mean_len, 1.4)));
            len = std::clamp(len, 2, 12);
            int guard = 0;
            do {
                word = make_pseudo_word(len, rng);
                if (++guard > 50) {
                    ++len;
                    if (len > 12) len = 2;
                    guard = 0;
                }
            } while (used.count(word) != 0 || is_stopword(word));
        }
        used.insert(word);
        const double count = 50000.0 / std::pow(static_cast<double>(rank), opt.zipf_exponent);
        counts.emplace_back(word, count);
    }
    world.lexicon = Lexicon::from_counts(counts);

    // Content words, most frequent first.
    std::vector<std::string> content;
    for (int rank = n_function; rank < total; ++rank)
        content.push_back(counts[static_cast<std::size_t>(rank)].first);

    // ---- Successor graph over content words ----
    // Zipf-weighted successor sets give each word a predictable continuation
    // profile the n-gram model can learn.
    std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> graph;
    for (const auto& w : content) {
        auto& successors = graph[w];
        std::set<std::size_t> chosen;
        for (int s = 0; s < opt.successors_per_word; ++s) {
            // Bias successors toward frequent words.
            const double u = rng.uniform();
            const std::size_t idx = static_cast<std::size_t>(
                std::pow(u, 2.0) * static_cast<double>(content.size() - 1));
            if (!chosen.insert(idx).second) continue;
            const double weight = 1.0 / std::pow(static_cast<double>(s + 1), 1.2);
            successors.emplace_back(content[idx], weight);
        }
    }
    auto next_word = [&](const std::string& w, Rng& r) -> std::string {
        auto it = graph.find(w);
        if (it == graph.end() || it->second.empty()) return content[r.index(content.size())];
        std::vector<double> weights;
        for (const auto& [_, wt] : it->second) weights.push_back(wt);
        return it->second[r.categorical(weights)].first;
    };
    auto start_word = [&](Rng& r) {
        // Frequency-biased starts.
        const double u = r.uniform();
        return content[static_cast<std::size_t>(std::pow(u, 2.0) * (content.size() - 1))];
    };

    auto chain_sentence = [&](int n_content, Rng& r, std::vector<std::string>* chain_out) {
        std::ostringstream text;
        std::string w = start_word(r);
        text << "the " << w;
        if (chain_out) chain_out->push_back(w);
        for (int i = 1; i < n_content; ++i) {
            w = next_word(w, r);
            text << ' ' << connector(r) << " the " << w;
            if (chain_out) chain_out->push_back(w);
        }
        return text.str();
    };

    // ---- Training corpus ----
    for (int s = 0; s < opt.corpus_sentences; ++s) {
        const int n_content = 2 + static_cast<int>(rng.index(4));  // 2..5 content words
        world.corpus.push_back(tokenize_sentence(chain_sentence(n_content, rng, nullptr)));
    }

    // ---- Natural stimuli with gold propositions ----
    auto build_stimulus = [&](const std::string& id, int sentences, Rng& r) {
        std::ostringstream body;
        body << "[meta]\nid = " << id << "\n[text]\n";
        std::set<std::pair<std::string, std::string>> props;
        for (int s = 0; s < sentences; ++s) {
            const int n_content = std::max(2, opt.words_per_sentence / 3);
            std::vector<std::string> chain;
            body << chain_sentence(n_content, r, &chain) << "\n";
            for (std::size_t i = 0; i + 1 < chain.size(); ++i)
                props.insert({chain[i], chain[i + 1]});
        }
        body << "[propositions]\n";
        for (const auto& [a, b] : props) body << a << "|rel|" << b << "\n";
        return Stimulus::from_text(id, body.str());
    };
    for (int t = 0; t < opt.natural_stimuli; ++t)
        world.natural.push_back(build_stimulus("natural" + std::to_string(t),
                                               opt.sentences_per_stimulus, rng));

    // ---- Knowledge / coherence contrast texts ----
    // A referential chain introduces each concept through the previous one
    // (first mention), then a mirrored summary pass re-mentions every link.
    // Bridge propositions therefore accumulate exactly two moderate-relevance
    // encounters in the coherent order; perturbing the order breaks the
    // adjacency that gives those encounters their relevance.
    {
        const int m = 12;  // concepts in the chain
        std::vector<std::string> concepts;
        std::unordered_set<std::string> taken;
        while (static_cast<int>(concepts.size()) < m) {
            // Mid-frequency band: recognizable but not trivially predictable.
            const std::size_t lo = content.size() / 10;
            const std::size_t hi = content.size() / 2;
            const std::string& c = content[lo + rng.index(hi - lo)];
            if (taken.insert(c).second) concepts.push_back(c);
        }
        std::vector<std::string> lines;
        std::set<std::pair<std::string, std::string>> gold;
        for (int i = 0; i + 1 < m; ++i) {
            lines.push_back("the " + concepts[static_cast<std::size_t>(i)] + " " + connector(rng) +
                            " the " + concepts[static_cast<std::size_t>(i + 1)]);
            if (i >= 1) gold.insert({concepts[static_cast<std::size_t>(i)],
                                     concepts[static_cast<std::size_t>(i + 1)]});
        }
        for (int i = 0; i + 1 < m; ++i)  // summary pass, same order
            lines.push_back("the " + concepts[static_cast<std::size_t>(i)] + " " + connector(rng) +
                            " the " + concepts[static_cast<std::size_t>(i + 1)]);

        auto to_stimulus = [&](const std::string& id, const std::vector<std::string>& ordered,
                               const std::string& knowledge) {
            std::ostringstream body;
            body << "[meta]\nid = " << id << "\n";
            if (!knowledge.empty()) body << "knowledge = " << knowledge << "\n";
            body << "[text]\n";
            for (const auto& l : ordered) body << l << "\n";
            body << "[propositions]\n";
            for (const auto& [a, b] : gold) body << a << "|rel|" << b << "\n";
            return Stimulus::from_text(id, body.str());
        };

        world.knowledge_text = to_stimulus("knowledge_chain", lines, "high");
        world.coherent_text = to_stimulus("coherent_chain", lines, "");

        // Low-coherence variant: displace sentences by swapping over distance
        // two; local pairs survive occasionally, long-range structure breaks.
        std::vector<std::string> scrambled = lines;
        for (std::size_t i = 0; i + 2 < scrambled.size(); i += 2)
            std::swap(scrambled[i], scrambled[i + 2]);
        world.incoherent_text = to_stimulus("incoherent_chain", scrambled, "");
    }

    return world;
}

void write_world(const GeneratedWorld& world, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    world.lexicon.save(dir + "/lexicon.tsv");
    std::ofstream corpus(dir + "/corpus.txt");
    if (!corpus) throw ReaderError("cannot write corpus file");
    for (const auto& sent : world.corpus) {
        for (std::size_t i = 0; i < sent.size(); ++i) corpus << (i ? " " : "") << sent[i];
        corpus << "\n";
    }
    fs::create_directories(dir + "/stimuli");
    for (const auto& s : world.natural) s.save(dir + "/stimuli/" + s.id + ".stim");
    world.knowledge_text.save(dir + "/stimuli/knowledge_chain.stim");
    world.coherent_text.save(dir + "/stimuli/coherent_chain.stim");
    world.incoherent_text.save(dir + "/stimuli/incoherent_chain.stim");
    std::ofstream manifest(dir + "/manifest.txt");
    manifest << "lexicon.tsv\ncorpus.txt\nstimuli/\n";
}

std::vector<std::vector<std::string>> load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReaderError("cannot open corpus file: " + path);
    std::vector<std::vector<std::string>> corpus;
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = tokenize_sentence(line);
        if (!tokens.empty()) corpus.push_back(std::move(tokens));
    }
    return corpus;
}

LoadedWorld load_world(const std::string& dir) {
    namespace fs = std::filesystem;
    LoadedWorld world{Lexicon::load(dir + "/lexicon.tsv"),
                      load_corpus_file(dir + "/corpus.txt"),
                      {},
                      {},
                      {},
                      {}};
    for (const auto& entry : fs::directory_iterator(dir + "/stimuli")) {
        if (entry.path().extension() != ".stim") continue;
        Stimulus s = Stimulus::load(entry.path().string());
        if (s.id == "knowledge_chain") world.knowledge_text = s;
        else if (s.id == "coherent_chain") world.coherent_text = s;
        else if (s.id == "incoherent_chain") world.incoherent_text = s;
        else world.natural.push_back(std::move(s));
    }
    std::sort(world.natural.begin(), world.natural.end(),
              [](const Stimulus& a, const Stimulus& b) { return a.id < b.id; });
    return world;
}

}  // namespace reader::datagen
