#pragma once

#include <string>
#include <vector>

#include "reader/rng.hpp"

namespace reader {

// Limited-acuity letter sampling and the ideal-observer likelihood.
struct AcuityConfig {
    int n_fov = 8;              // high-acuity letters around fixation
    int n_parafov = 2;          // previewable letters of the next word
    double epsilon0 = 0.05;     // letter confusion probability at fixation
    double epsilon_slope = 0.04;  // confusion increase per letter of eccentricity
    int alphabet_size = 26;
    double lambda_len = 1e-6;   // likelihood factor for a length mismatch

    // Confusion probability at eccentricity d, capped below 1.
    double epsilon(double d) const;
    void validate() const;
};

struct LetterObservation {
    struct Slot {
        int position = 0;        // letter index within the word
        char observed = 0;       // sampled letter (possibly confused)
        double eccentricity = 0; // letters from fixation
    };
    int word_len = 0;
    std::vector<Slot> slots;

    bool empty() const { return slots.empty(); }
};

// Contiguous indices covered by the fovea: (n_fov-1)/2 letters left of the
// fixation, n_fov/2 right, clipped to the word.
std::vector<int> visible_window(int fixation, int word_len, const AcuityConfig& cfg);

// Samples what the reader sees when fixating `fixation` in `true_word`:
// each visible letter is reported faithfully with probability 1-eps(d),
// otherwise as a uniformly random other letter.
LetterObservation sample_observation(const std::string& true_word, int fixation,
                                     const AcuityConfig& cfg, Rng& rng);

// Ideal-observer likelihood P(observation | candidate). Unobserved positions
// contribute 1; a length mismatch collapses to lambda_len.
double observation_likelihood(const LetterObservation& obs, const std::string& candidate,
                              const AcuityConfig& cfg);

// Noisy preview of the first n_parafov letters of the upcoming word, at
// eccentricity n_fov/2 + position.
LetterObservation parafoveal_preview(const std::string& next_word, const AcuityConfig& cfg,
                                     Rng& rng);

}  // namespace reader
