#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reader/corpus.hpp"
#include "reader/rollout.hpp"
#include "reader/trace.hpp"

namespace reader::eval {

struct LinearFit {
    double beta = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares; throws DegenerateFit on zero variance in x.
// Constant y fits beta = 0 with r2 = 0.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double logit(double p);  // p clamped to [0.001, 0.999] first

// One word occurrence in one episode.
struct WordMetricRow {
    std::string stimulus;
    int episode = 0;
    int sentence = 0;
    int word = 0;
    std::string token;
    int length = 0;
    double log10_freq = 0.0;
    double predictability = 0.0;
    double logit_predictability = 0.0;
    double difficulty = 0.0;  // normalized surprisal
    double gaze_duration_ms = 0.0;
    int first_pass_fixations = 0;
    bool skipped = false;         // no first-pass fixation
    bool regressed_into = false;  // fixated again after the gaze moved past
};

struct EpisodeMetricRow {
    std::string stimulus;
    int episode = 0;
    double words_per_minute = 0.0;
    double mean_fixation_ms = 0.0;
    double mean_saccade_letters = 0.0;
    int fixation_count = 0;
    double total_ms = 0.0;
    double skip_rate = 0.0;
    double regression_rate = 0.0;
    double comprehension = 0.0;
    double recall = -1.0;
    double mcq_accuracy = -1.0;
    bool partial = false;
};

struct MetricTable {
    std::vector<WordMetricRow> words;
    std::vector<EpisodeMetricRow> episodes;

    void write_words_csv(const std::string& path) const;
    void write_episodes_csv(const std::string& path) const;
};

// Derives behavioral metrics from traces; covariates come from the lexicon
// and predictor using the true sentence contexts.
MetricTable compute_metrics(const std::vector<ScanpathTrace>& traces, const Stimulus& stimulus,
                            const SimContext& ctx);

struct BinnedCurve {
    std::vector<double> x;     // bin centers
    std::vector<double> mean;
    std::vector<double> var;   // variance of the bin mean
    std::vector<int> count;
};

// Equal-count (quantile) binning of y over key; bins with fewer than
// min_count observations are dropped.
BinnedCurve bin_means(const std::vector<double>& keys, const std::vector<double>& values,
                      int n_bins, int min_count = 3);
// Integer-key binning (word length).
BinnedCurve bin_means_integer(const std::vector<double>& keys, const std::vector<double>& values,
                              int min_count = 3);

LinearFit fit_curve(const BinnedCurve& curve);

// The condensed description the fitting pipeline compares: lexical-effect
// curves, recall cells, and time-pressure cells.
struct TimePressureCell {
    double condition_ms = 0.0;
    double wpm = 0.0, wpm_sd = 0.0;
    double skip = 0.0, skip_sd = 0.0;
    double regression = 0.0, regression_sd = 0.0;
    double mcq = 0.0, mcq_sd = 0.0;
    double recall = 0.0, recall_sd = 0.0;
};

struct MetricSummary {
    BinnedCurve gd_by_length, gd_by_logfreq, gd_by_logitpred;
    BinnedCurve skip_by_length, skip_by_logfreq, skip_by_logitpred;
    BinnedCurve regression_by_difficulty;
    // Recall cells; negative when the condition was not run.
    double recall_high = -1.0, recall_high_sd = 0.0;
    double recall_low = -1.0, recall_low_sd = 0.0;
    double recall_coherent = -1.0, recall_coherent_sd = 0.0;
    double recall_incoherent = -1.0, recall_incoherent_sd = 0.0;
    std::vector<TimePressureCell> time_pressure;
    // Optional gaze-duration histogram (normalized) for distribution-level
    // comparison; empty when unavailable.
    std::vector<double> gd_histogram;
    double gd_histogram_lo = 0.0, gd_histogram_hi = 0.0;

    std::string to_json() const;
    static MetricSummary from_json_text(const std::string& text);
    static MetricSummary load(const std::string& path);
    void save(const std::string& path) const;
};

// Word-level curves from a metric table (gaze duration over fixated words,
// skip/regression rates over all considered words).
void fill_lexical_curves(MetricSummary& summary, const MetricTable& table, int n_bins = 6);

// Normalized histogram of gaze durations over [lo, hi) with n equal bins.
std::vector<double> gd_histogram(const MetricTable& table, double lo, double hi, int n_bins);

// Mean and (population) standard deviation.
std::pair<double, double> mean_sd(const std::vector<double>& values);

}  // namespace reader::eval
