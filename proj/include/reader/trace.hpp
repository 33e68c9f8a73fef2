#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reader {

// One timestamped event of a hierarchical reading episode. Text-level
// read/regress actions emit a begin marker, then the nested sentence- and
// word-level events, then an `appraise` completion record.
struct TraceEvent {
    enum class Level { Word, Sentence, Text };
    Level level = Level::Word;
    std::string action;  // fixate, commit, next, skip, regress, stop, read, appraise, expire
    int sentence = -1;
    int word = -1;
    int letter = -1;
    double duration_ms = 0.0;
    double score = 0.0;    // psi / phi / correctness, depending on the event
    double running = 0.0;  // u_t at emission
    double cum_ms = 0.0;
};

struct ScanpathTrace {
    std::string stimulus_id;
    std::uint64_t seed = 0;
    std::vector<TraceEvent> events;

    // Episode outcomes.
    double comprehension = 0.0;
    double recall = -1.0;        // -1 when the stimulus has no gold propositions
    double mcq_accuracy = -1.0;  // -1 when no questions could be built
    int mcq_correct = 0;
    int mcq_total = 0;
    double total_ms = 0.0;
    int fixation_count = 0;
    bool partial = false;  // budget exhausted before the agent stopped
    bool all_read = false;

    std::string to_jsonl() const;
    static ScanpathTrace from_jsonl(const std::string& line);
};

// Structural validity: nondecreasing timestamps and consistent nesting of
// word events inside sentence actions inside text read/appraise pairs.
// Returns an empty string when valid, else a description of the violation.
std::string validate_trace(const ScanpathTrace& trace);

void write_traces(const std::string& path, const std::vector<ScanpathTrace>& traces);
std::vector<ScanpathTrace> read_traces(const std::string& path);

// Scanpath rendering: words laid out left-to-right with wrapping, fixation
// dots sized by duration, first-pass fixations and saccades in red,
// regressions in green, skipped words hatched blue.
std::string render_scanpath_svg(const ScanpathTrace& trace,
                                const std::vector<std::vector<std::string>>& sentences);

}  // namespace reader
