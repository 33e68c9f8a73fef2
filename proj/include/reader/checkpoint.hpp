#pragma once

#include <string>

#include "reader/net.hpp"

namespace reader::rl {

// Versioned JSON weight dump with the featurization contract embedded, so a
// mismatched loader fails loudly instead of mis-decoding observations.
struct Checkpoint {
    std::string level;  // word | sentence | text
    std::string tag;    // free-form marker, e.g. "myopic-0.2" or "time"
    int feature_dim = 0;
    int action_count = 0;
    int hidden = 0;
    PolicyNet net;

    void save(const std::string& path) const;
    // Throws IncompatibleCheckpoint when level/dims do not match expectations.
    static Checkpoint load(const std::string& path, const std::string& expected_level,
                           int expected_feature_dim, int expected_actions);
};

}  // namespace reader::rl
