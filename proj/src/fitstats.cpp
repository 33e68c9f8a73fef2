#include "reader/fitstats.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "reader/errors.hpp"
#include "reader/rng.hpp"

namespace reader::eval {

double reduced_chi2(const std::vector<double>& sim_means, const std::vector<double>& human_means,
                    const std::vector<double>& human_vars, double var_floor, int* floored) {
    if (sim_means.size() != human_means.size() || sim_means.size() != human_vars.size())
        throw ReaderError("reduced_chi2 length mismatch");
    if (sim_means.empty()) throw ReaderError("reduced_chi2 on empty input");
    double total = 0.0;
    int n_floored = 0;
    for (std::size_t i = 0; i < sim_means.size(); ++i) {
        double var = human_vars[i];
        if (var <= 0.0) {
            var = var_floor;
            ++n_floored;
        }
        const double d = sim_means[i] - human_means[i];
        total += d * d / var;
    }
    if (floored) *floored = n_floored;
    return total / static_cast<double>(sim_means.size());
}

double sum_squared_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ReaderError("sse length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
    return total;
}

double jensen_shannon(std::vector<double> p, std::vector<double> q, bool* renormalized) {
    if (p.size() != q.size()) throw ReaderError("jsd support mismatch");
    if (p.empty()) throw ReaderError("jsd on empty support");
    auto normalize = [](std::vector<double>& v) {
        double total = 0.0;
        for (double x : v) {
            if (x < 0.0) throw ReaderError("jsd on negative mass");
            total += x;
        }
        if (total <= 0.0) throw ReaderError("jsd on zero mass");
        const bool off = std::abs(total - 1.0) > 1e-9;
        for (double& x : v) x /= total;
        return off;
    };
    const bool off_p = normalize(p);
    const bool off_q = normalize(q);
    if (renormalized) *renormalized = off_p || off_q;
    double jsd = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) jsd += 0.5 * p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) jsd += 0.5 * q[i] * std::log2(q[i] / m);
    }
    return std::max(0.0, jsd);
}

SearchResult grid_search(const std::function<double(const std::vector<double>&)>& objective,
                         const std::vector<std::vector<double>>& param_grid) {
    if (param_grid.empty()) throw ReaderError("empty parameter grid");
    for (const auto& axis : param_grid)
        if (axis.empty()) throw ReaderError("empty grid axis");
    SearchResult result;
    std::vector<std::size_t> idx(param_grid.size(), 0);
    bool first = true;
    for (;;) {
        std::vector<double> point(param_grid.size());
        for (std::size_t d = 0; d < param_grid.size(); ++d) point[d] = param_grid[d][idx[d]];
        const double value = objective(point);
        result.history.emplace_back(point, value);
        const bool better =
            first || value < result.best_value ||
            (value == result.best_value && std::lexicographical_compare(point.begin(), point.end(),
                                                                        result.best.begin(),
                                                                        result.best.end()));
        if (better) {
            result.best = point;
            result.best_value = value;
            first = false;
        }
        // Advance the cartesian counter.
        std::size_t d = param_grid.size();
        while (d > 0) {
            --d;
            if (++idx[d] < param_grid[d].size()) break;
            idx[d] = 0;
            if (d == 0) return result;
        }
    }
}

// ---- Bayesian optimization ----

namespace {

struct Gp {
    Eigen::MatrixXd x;       // n x d, normalized to [0,1]
    Eigen::VectorXd y;       // centered
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;
    double mean = 0.0;
    double sigma_f2 = 1.0;
    double length_scale = 0.3;
    bool ok = false;

    static double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double sf2,
                         double ls) {
        const double d2 = (a - b).squaredNorm();
        return sf2 * std::exp(-0.5 * d2 / (ls * ls));
    }

    // Fits with jitter escalation; returns false when the covariance stays
    // numerically singular.
    bool fit(const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys) {
        x = xs;
        mean = ys.mean();
        y = ys.array() - mean;
        const double var = y.squaredNorm() / std::max<int>(1, static_cast<int>(y.size()));
        sigma_f2 = std::max(var, 1e-12);
        const int n = static_cast<int>(x.rows());
        Eigen::MatrixXd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                k(i, j) = kernel(x.row(i), x.row(j), sigma_f2, length_scale);
        double jitter = 1e-10 * sigma_f2 + 1e-12;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd kj = k + jitter * Eigen::MatrixXd::Identity(n, n);
            llt.compute(kj);
            if (llt.info() == Eigen::Success) {
                alpha = llt.solve(y);
                ok = true;
                return true;
            }
            jitter *= 10.0;
        }
        ok = false;
        return false;
    }

    void predict(const Eigen::RowVectorXd& q, double& mu, double& sd) const {
        const int n = static_cast<int>(x.rows());
        Eigen::VectorXd ks(n);
        for (int i = 0; i < n; ++i) ks(i) = kernel(x.row(i), q, sigma_f2, length_scale);
        mu = mean + ks.dot(alpha);
        const Eigen::VectorXd v = llt.matrixL().solve(ks);
        const double var = std::max(1e-14, sigma_f2 - v.squaredNorm());
        sd = std::sqrt(var);
    }
};

double norm_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / 2.5066282746310002; }

// Expected improvement for minimization.
double expected_improvement(double mu, double sd, double best) {
    if (sd <= 0.0) return std::max(0.0, best - mu);
    const double z = (best - mu) / sd;
    return (best - mu) * norm_cdf(z) + sd * norm_pdf(z);
}

}  // namespace

SearchResult bayes_opt(const std::function<double(const std::vector<double>&)>& objective,
                       const std::vector<std::pair<double, double>>& bounds, int budget,
                       std::uint64_t seed) {
    const int dim = static_cast<int>(bounds.size());
    if (dim == 0) throw ReaderError("bayes_opt needs at least one dimension");
    if (budget < 2 * dim) throw ReaderError("bayes_opt budget must be >= 2*dim");
    Rng rng(Rng::splitmix64(seed ^ 0xB0B0ull));

    auto denorm = [&](const std::vector<double>& u) {
        std::vector<double> x(u.size());
        for (int d = 0; d < dim; ++d)
            x[static_cast<std::size_t>(d)] =
                bounds[static_cast<std::size_t>(d)].first +
                u[static_cast<std::size_t>(d)] * (bounds[static_cast<std::size_t>(d)].second -
                                                  bounds[static_cast<std::size_t>(d)].first);
        return x;
    };

    SearchResult result;
    std::vector<std::vector<double>> xs_unit;
    std::vector<double> ys;
    auto evaluate = [&](const std::vector<double>& unit) {
        const std::vector<double> x = denorm(unit);
        const double y = objective(x);
        xs_unit.push_back(unit);
        ys.push_back(y);
        result.history.emplace_back(x, y);
        if (result.best.empty() || y < result.best_value) {
            result.best = x;
            result.best_value = y;
        }
    };

    // Space-filling start: jittered stratification along each axis.
    const int n_init = std::min(budget, std::max(2, 2 * dim));
    for (int i = 0; i < n_init; ++i) {
        std::vector<double> u(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            u[static_cast<std::size_t>(d)] =
                (static_cast<double>((i + d * 3) % n_init) + rng.uniform()) / n_init;
        evaluate(u);
    }

    Gp gp;
    while (static_cast<int>(ys.size()) < budget) {
        Eigen::MatrixXd x(static_cast<int>(xs_unit.size()), dim);
        Eigen::VectorXd y(static_cast<int>(ys.size()));
        for (std::size_t i = 0; i < xs_unit.size(); ++i) {
            for (int d = 0; d < dim; ++d) x(static_cast<int>(i), d) = xs_unit[i][static_cast<std::size_t>(d)];
            y(static_cast<int>(i)) = ys[i];
        }
        std::vector<double> next(static_cast<std::size_t>(dim));
        if (gp.fit(x, y)) {
            // EI over random candidates plus local perturbations of the best.
            double best_ei = -1.0;
            const std::size_t best_idx = static_cast<std::size_t>(
                std::min_element(ys.begin(), ys.end()) - ys.begin());
            for (int c = 0; c < 512; ++c) {
                std::vector<double> u(static_cast<std::size_t>(dim));
                if (c % 4 == 0) {
                    for (int d = 0; d < dim; ++d)
                        u[static_cast<std::size_t>(d)] = std::clamp(
                            xs_unit[best_idx][static_cast<std::size_t>(d)] + rng.normal(0.0, 0.08),
                            0.0, 1.0);
                } else {
                    for (int d = 0; d < dim; ++d) u[static_cast<std::size_t>(d)] = rng.uniform();
                }
                Eigen::RowVectorXd q(dim);
                for (int d = 0; d < dim; ++d) q(d) = u[static_cast<std::size_t>(d)];
                double mu, sd;
                gp.predict(q, mu, sd);
                const double ei = expected_improvement(mu, sd, result.best_value);
                if (ei > best_ei) {
                    best_ei = ei;
                    next = u;
                }
            }
        } else {
            result.random_fallback = true;
            for (int d = 0; d < dim; ++d) next[static_cast<std::size_t>(d)] = rng.uniform();
        }
        evaluate(next);
    }
    return result;
}

}  // namespace reader::eval
