#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reader/corpus.hpp"

namespace reader::datagen {

struct GeneratorOptions {
    int vocabulary_size = 2000;
    int function_words = 18;        // high-frequency connectors (stopwords)
    int corpus_sentences = 4000;    // n-gram / word-level training material
    int natural_stimuli = 12;       // multi-sentence texts for sentence/text training
    int sentences_per_stimulus = 10;
    int words_per_sentence = 10;    // approximate; varies
    int successors_per_word = 12;   // branching of the content-word graph
    double zipf_exponent = 1.05;
    std::uint64_t seed = 20240101;
};

// A self-contained synthetic language: lexicon with Zipfian frequencies, a
// content-word successor graph, a training corpus sampled from it, and
// stimulus texts (with gold propositions) sampled from the same graph.
struct GeneratedWorld {
    Lexicon lexicon;
    std::vector<std::vector<std::string>> corpus;  // tokenized sentences
    std::vector<Stimulus> natural;                 // training/evaluation texts
    Stimulus knowledge_text;       // coherent chain text for the knowledge contrast
    Stimulus coherent_text;        // coherent variant for the coherence contrast
    Stimulus incoherent_text;      // order-perturbed low-coherence variant
};

GeneratedWorld generate_world(const GeneratorOptions& options);

// Writes lexicon.tsv, corpus.txt, stimulus files, and a manifest into dir.
void write_world(const GeneratedWorld& world, const std::string& dir);

// Reads back what write_world produced.
struct LoadedWorld {
    Lexicon lexicon;
    std::vector<std::vector<std::string>> corpus;
    std::vector<Stimulus> natural;
    Stimulus knowledge_text;
    Stimulus coherent_text;
    Stimulus incoherent_text;
};
LoadedWorld load_world(const std::string& dir);

std::vector<std::vector<std::string>> load_corpus_file(const std::string& path);

}  // namespace reader::datagen
