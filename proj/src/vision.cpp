#include "reader/vision.hpp"

#include <algorithm>
#include <cmath>

#include "reader/errors.hpp"

namespace reader {

double AcuityConfig::epsilon(double d) const {
    return std::min(epsilon0 + epsilon_slope * d, 0.95);
}

void AcuityConfig::validate() const {
    if (n_fov < 1) throw ConfigError("n_fov must be positive");
    if (n_parafov < 0 || n_parafov > 3) throw ConfigError("n_parafov must be in [0,3]");
    if (epsilon0 < 0.0 || epsilon0 >= 1.0) throw ConfigError("epsilon0 must be in [0,1)");
    if (epsilon_slope < 0.0) throw ConfigError("epsilon_slope must be >= 0");
    if (epsilon0 + epsilon_slope * (n_fov / 2.0) >= 1.0)
        throw ConfigError("confusion probability reaches 1 inside the fovea");
    if (alphabet_size < 2) throw ConfigError("alphabet_size must be >= 2");
}

std::vector<int> visible_window(int fixation, int word_len, const AcuityConfig& cfg) {
    const int left = (cfg.n_fov - 1) / 2;
    const int right = cfg.n_fov / 2;
    const int lo = std::max(0, fixation - left);
    const int hi = std::min(word_len - 1, fixation + right);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max(0, hi - lo + 1)));
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
}

namespace {

char confuse_letter(char truth, int alphabet_size, Rng& rng) {
    // Uniform over the other letters of the alphabet.
    int offset = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(alphabet_size - 1)));
    int truth_idx = truth - 'a';
    if (truth_idx < 0 || truth_idx >= alphabet_size) truth_idx = alphabet_size;  // non a-z never collides
    int sampled = offset >= truth_idx ? offset + 1 : offset;
    if (sampled >= alphabet_size) sampled = offset;  // truth outside alphabet: plain uniform
    return static_cast<char>('a' + sampled);
}

}  // namespace

LetterObservation sample_observation(const std::string& true_word, int fixation,
                                     const AcuityConfig& cfg, Rng& rng) {
    LetterObservation obs;
    obs.word_len = static_cast<int>(true_word.size());
    for (int pos : visible_window(fixation, obs.word_len, cfg)) {
        const double d = std::abs(pos - fixation);
        LetterObservation::Slot slot;
        slot.position = pos;
        slot.eccentricity = d;
        const char truth = true_word[static_cast<std::size_t>(pos)];
        slot.observed = rng.uniform() < cfg.epsilon(d) ? confuse_letter(truth, cfg.alphabet_size, rng)
                                                       : truth;
        obs.slots.push_back(slot);
    }
    return obs;
}

double observation_likelihood(const LetterObservation& obs, const std::string& candidate,
                              const AcuityConfig& cfg) {
    if (static_cast<int>(candidate.size()) != obs.word_len) return cfg.lambda_len;
    double lik = 1.0;
    for (const auto& slot : obs.slots) {
        const double eps = cfg.epsilon(slot.eccentricity);
        if (candidate[static_cast<std::size_t>(slot.position)] == slot.observed)
            lik *= 1.0 - eps;
        else
            lik *= eps / static_cast<double>(cfg.alphabet_size - 1);
    }
    return lik;
}

LetterObservation parafoveal_preview(const std::string& next_word, const AcuityConfig& cfg,
                                     Rng& rng) {
    LetterObservation obs;
    obs.word_len = static_cast<int>(next_word.size());
    const int n = std::min<int>(cfg.n_parafov, obs.word_len);
    for (int pos = 0; pos < n; ++pos) {
        const double d = cfg.n_fov / 2.0 + pos;
        LetterObservation::Slot slot;
        slot.position = pos;
        slot.eccentricity = d;
        const char truth = next_word[static_cast<std::size_t>(pos)];
        slot.observed = rng.uniform() < cfg.epsilon(d) ? confuse_letter(truth, cfg.alphabet_size, rng)
                                                       : truth;
        obs.slots.push_back(slot);
    }
    return obs;
}

}  // namespace reader
