#pragma once

#include <stdexcept>
#include <string>

namespace reader {

// Typed failures surfaced through the library API. The CLI maps these to
// exit codes (config 2, dependency 3, runtime divergence 4).
struct ReaderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : ReaderError {
    ParseError(const std::string& what, std::size_t line)
        : ReaderError(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

struct LexiconEmpty : ReaderError {
    LexiconEmpty() : ReaderError("lexicon file contains no entries") {}
};

struct StimulusEmpty : ReaderError {
    StimulusEmpty() : ReaderError("stimulus has no sentences") {}
};

struct UnknownWord : ReaderError {
    explicit UnknownWord(const std::string& w) : ReaderError("word not in lexicon: " + w) {}
};

struct PriorDegenerate : ReaderError {
    PriorDegenerate() : ReaderError("belief prior has zero total mass") {}
};

struct EpisodeDone : ReaderError {
    EpisodeDone() : ReaderError("step() called on a finished episode") {}
};

struct InvalidAction : ReaderError {
    using ReaderError::ReaderError;
};

struct ConfigError : ReaderError {
    using ReaderError::ReaderError;
};

struct DependencyMissing : ReaderError {
    using ReaderError::ReaderError;
};

struct IncompatibleCheckpoint : ReaderError {
    using ReaderError::ReaderError;
};

struct TrainingDiverged : ReaderError {
    using ReaderError::ReaderError;
};

struct SchemaError : ReaderError {
    using ReaderError::ReaderError;
};

struct DegenerateFit : ReaderError {
    DegenerateFit() : ReaderError("regressor has zero variance") {}
};

struct InvalidBudget : ReaderError {
    using ReaderError::ReaderError;
};

struct Unavailable : ReaderError {
    using ReaderError::ReaderError;
};

}  // namespace reader
