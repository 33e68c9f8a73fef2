#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reader/fitstats.hpp"
#include "reader/metrics.hpp"

namespace reader::eval {

// Composite discrepancy between a simulated summary and a reference summary.
// Curve terms use variance-aware reduced chi^2, cell terms use SSE, and the
// optional gaze-duration histogram uses Jensen-Shannon divergence. Each term
// is tied to the parameter subset that the staged fit tunes against it.
struct DiscrepancyWeights {
    double gaze_duration = 1.0;  // kappa
    double skip_regression = 1.0;  // w_reg
    double recall = 1.0;  // tau_high / tau_low
    double time_pressure = 1.0;  // rho, w_tp, w_il, w_rp
    double distribution = 1.0;  // gd histogram (JSD), applied when both sides have one
};

struct DiscrepancyBreakdown {
    double total = 0.0;
    std::map<std::string, double> terms;  // term name -> weighted value
};

DiscrepancyBreakdown composite_discrepancy(const MetricSummary& sim, const MetricSummary& reference,
                                           const DiscrepancyWeights& weights = {});

// One named stage of the staged procedure. Grid stages carry a grid; the
// final multi-parameter stage carries bounds and a budget for Bayesian
// optimization.
struct FitStageSpec {
    std::string name;
    std::vector<std::string> parameter_names;
    std::function<double(const std::vector<double>&)> objective;
    std::vector<std::vector<double>> grid;              // grid stages
    std::vector<std::pair<double, double>> bounds;      // BO stage
    int budget = 0;                                     // BO stage
    std::uint64_t seed = 1;
};

struct FitStageReport {
    std::string name;
    std::vector<std::string> parameter_names;
    std::vector<double> best;
    double best_value = 0.0;
    std::vector<std::pair<std::vector<double>, double>> history;
    bool random_fallback = false;
};

struct FitReport {
    std::vector<FitStageReport> stages;
    std::map<std::string, double> best_parameters;

    std::string to_json() const;
    void save(const std::string& path) const;
};

// Runs the stages in order; each stage's objective may read parameters fixed
// by earlier stages through the shared `fixed` map the caller closes over.
FitReport run_staged_fit(const std::vector<FitStageSpec>& stages);

}  // namespace reader::eval
