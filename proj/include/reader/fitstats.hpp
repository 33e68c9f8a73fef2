#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace reader::eval {

// (1/N) * sum (s_i - h_i)^2 / var_i. Zero variances are replaced by
// var_floor (the replacement is counted in `floored` when given).
double reduced_chi2(const std::vector<double>& sim_means, const std::vector<double>& human_means,
                    const std::vector<double>& human_vars, double var_floor = 1e-6,
                    int* floored = nullptr);

double sum_squared_error(const std::vector<double>& a, const std::vector<double>& b);

// Jensen-Shannon divergence in bits, in [0,1]. Unnormalized inputs are
// renormalized (flagged through `renormalized` when given).
double jensen_shannon(std::vector<double> p, std::vector<double> q, bool* renormalized = nullptr);

struct SearchResult {
    std::vector<double> best;
    double best_value = 0.0;
    std::vector<std::pair<std::vector<double>, double>> history;
    bool random_fallback = false;  // GP degenerated into random sampling
};

// Exhaustive cartesian evaluation; ties resolve to the lexicographically
// smallest parameter vector.
SearchResult grid_search(const std::function<double(const std::vector<double>&)>& objective,
                         const std::vector<std::vector<double>>& param_grid);

// Gaussian-process (squared-exponential) surrogate with expected-improvement
// acquisition; deterministic given the seed.
SearchResult bayes_opt(const std::function<double(const std::vector<double>&)>& objective,
                       const std::vector<std::pair<double, double>>& bounds, int budget,
                       std::uint64_t seed);

}  // namespace reader::eval
