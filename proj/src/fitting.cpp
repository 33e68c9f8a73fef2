#include "reader/fitting.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "reader/errors.hpp"

namespace reader::eval {

namespace {

// Aligns a simulated curve to the reference support by nearest-x matching,
// then scores with reduced chi^2 against the reference variances. Curves
// that cannot be aligned contribute nothing (returned count 0).
bool curve_chi2(const BinnedCurve& sim, const BinnedCurve& ref, double& chi2_sum, int& terms) {
    if (sim.x.empty() || ref.x.empty()) return false;
    std::vector<double> sim_means, ref_means, ref_vars;
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
        // Nearest simulated bin.
        std::size_t nearest = 0;
        double best = 1e300;
        for (std::size_t j = 0; j < sim.x.size(); ++j) {
            const double d = std::abs(sim.x[j] - ref.x[i]);
            if (d < best) {
                best = d;
                nearest = j;
            }
        }
        sim_means.push_back(sim.mean[nearest]);
        ref_means.push_back(ref.mean[i]);
        ref_vars.push_back(ref.var[i]);
    }
    chi2_sum += reduced_chi2(sim_means, ref_means, ref_vars);
    ++terms;
    return true;
}

}  // namespace

DiscrepancyBreakdown composite_discrepancy(const MetricSummary& sim, const MetricSummary& reference,
                                           const DiscrepancyWeights& weights) {
    DiscrepancyBreakdown out;

    {  // Gaze-duration curves -> kappa.
        double chi2 = 0.0;
        int terms = 0;
        curve_chi2(sim.gd_by_length, reference.gd_by_length, chi2, terms);
        curve_chi2(sim.gd_by_logfreq, reference.gd_by_logfreq, chi2, terms);
        curve_chi2(sim.gd_by_logitpred, reference.gd_by_logitpred, chi2, terms);
        if (terms > 0)
            out.terms["gaze_duration"] = weights.gaze_duration * chi2 / terms;
    }
    {  // Skip and regression curves -> w_reg.
        double chi2 = 0.0;
        int terms = 0;
        curve_chi2(sim.skip_by_length, reference.skip_by_length, chi2, terms);
        curve_chi2(sim.skip_by_logfreq, reference.skip_by_logfreq, chi2, terms);
        curve_chi2(sim.skip_by_logitpred, reference.skip_by_logitpred, chi2, terms);
        curve_chi2(sim.regression_by_difficulty, reference.regression_by_difficulty, chi2, terms);
        if (terms > 0)
            out.terms["skip_regression"] = weights.skip_regression * chi2 / terms;
    }
    {  // Recall cells -> tau_high / tau_low.
        std::vector<double> s, r;
        auto add_cell = [&](double sv, double rv) {
            if (sv >= 0.0 && rv >= 0.0) {
                s.push_back(sv);
                r.push_back(rv);
            }
        };
        add_cell(sim.recall_high, reference.recall_high);
        add_cell(sim.recall_low, reference.recall_low);
        add_cell(sim.recall_coherent, reference.recall_coherent);
        add_cell(sim.recall_incoherent, reference.recall_incoherent);
        if (!s.empty()) out.terms["recall"] = weights.recall * sum_squared_error(s, r);
    }
    {  // Time-pressure cells -> rho, w_tp, w_il, w_rp.
        std::vector<double> s, r;
        for (const auto& rc : reference.time_pressure) {
            const TimePressureCell* match = nullptr;
            for (const auto& sc : sim.time_pressure)
                if (std::abs(sc.condition_ms - rc.condition_ms) < 1.0) match = &sc;
            if (!match) continue;
            // wpm is rescaled so all cells share an order of magnitude.
            s.push_back(match->wpm / 100.0);
            r.push_back(rc.wpm / 100.0);
            s.push_back(match->skip);
            r.push_back(rc.skip);
            s.push_back(match->regression);
            r.push_back(rc.regression);
            s.push_back(match->mcq);
            r.push_back(rc.mcq);
            s.push_back(match->recall);
            r.push_back(rc.recall);
        }
        if (!s.empty()) out.terms["time_pressure"] = weights.time_pressure * sum_squared_error(s, r);
    }
    if (!sim.gd_histogram.empty() && sim.gd_histogram.size() == reference.gd_histogram.size()) {
        out.terms["gd_distribution"] =
            weights.distribution * jensen_shannon(sim.gd_histogram, reference.gd_histogram);
    }
    for (const auto& [name, value] : out.terms) out.total += value;
    return out;
}

FitReport run_staged_fit(const std::vector<FitStageSpec>& stages) {
    FitReport report;
    for (const auto& stage : stages) {
        FitStageReport sr;
        sr.name = stage.name;
        sr.parameter_names = stage.parameter_names;
        SearchResult res;
        if (!stage.grid.empty()) {
            res = grid_search(stage.objective, stage.grid);
        } else {
            if (stage.budget <= 0) throw InvalidBudget("stage '" + stage.name + "' has no budget");
            res = bayes_opt(stage.objective, stage.bounds, stage.budget, stage.seed);
        }
        sr.best = res.best;
        sr.best_value = res.best_value;
        sr.history = std::move(res.history);
        sr.random_fallback = res.random_fallback;
        for (std::size_t i = 0; i < stage.parameter_names.size() && i < sr.best.size(); ++i)
            report.best_parameters[stage.parameter_names[i]] = sr.best[i];
        report.stages.push_back(std::move(sr));
    }
    return report;
}

std::string FitReport::to_json() const {
    nlohmann::json j;
    j["best_parameters"] = best_parameters;
    nlohmann::json stages_json = nlohmann::json::array();
    for (const auto& s : stages) {
        nlohmann::json js;
        js["name"] = s.name;
        js["parameters"] = s.parameter_names;
        js["best"] = s.best;
        js["best_value"] = s.best_value;
        js["random_fallback"] = s.random_fallback;
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& [point, value] : s.history)
            hist.push_back({{"point", point}, {"value", value}});
        js["history"] = std::move(hist);
        stages_json.push_back(std::move(js));
    }
    j["stages"] = std::move(stages_json);
    return j.dump(2);
}

void FitReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write fit report: " + path);
    out << to_json();
}

}  // namespace reader::eval
