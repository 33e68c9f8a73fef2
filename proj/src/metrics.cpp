#include "reader/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "reader/errors.hpp"

namespace reader::eval {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw ReaderError("linear_fit needs matched inputs of length >= 3");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw DegenerateFit();
    LinearFit fit;
    fit.beta = sxy / sxx;
    fit.intercept = my - fit.beta * mx;
    if (syy <= 0.0) {
        fit.r2 = 0.0;  // constant response
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (fit.intercept + fit.beta * x[i]);
            ss_res += e * e;
        }
        fit.r2 = 1.0 - ss_res / syy;
    }
    return fit;
}

double logit(double p) {
    p = std::clamp(p, 0.001, 0.999);
    return std::log(p / (1.0 - p));
}

// ---- metric derivation from traces ----

namespace {

struct WordGeometry {
    std::vector<std::vector<long>> start;  // global letter offset per word
    long flat(const Stimulus& stim, int s, int w) const {
        long pos = 0;
        for (int i = 0; i < s; ++i) pos += static_cast<long>(stim.sentences[static_cast<std::size_t>(i)].size());
        return pos + w;
    }
};

WordGeometry build_geometry(const Stimulus& stim) {
    WordGeometry g;
    long offset = 0;
    g.start.resize(stim.sentence_count());
    for (std::size_t s = 0; s < stim.sentence_count(); ++s) {
        g.start[s].resize(stim.sentences[s].size());
        for (std::size_t w = 0; w < stim.sentences[s].size(); ++w) {
            g.start[s][w] = offset;
            offset += static_cast<long>(stim.sentences[s][w].size()) + 1;
        }
    }
    return g;
}

}  // namespace

MetricTable compute_metrics(const std::vector<ScanpathTrace>& traces, const Stimulus& stimulus,
                            const SimContext& ctx) {
    MetricTable table;
    const WordGeometry geom = build_geometry(stimulus);
    const double log2_vocab = std::log2(std::max<double>(2.0, static_cast<double>(ctx.lexicon->size())));

    for (std::size_t ep = 0; ep < traces.size(); ++ep) {
        const ScanpathTrace& trace = traces[ep];
        // Words touched by sentence-level next/skip events are "considered".
        std::set<std::pair<int, int>> considered;
        for (const auto& e : trace.events)
            if (e.level == TraceEvent::Level::Sentence &&
                (e.action == "next" || e.action == "skip") && e.word >= 0)
                considered.insert({e.sentence, e.word});

        // First-pass accounting over word fixations in order.
        struct WordAcc {
            double gd = 0.0;
            int first_pass = 0;
            bool entered = false, left = false, regressed = false;
        };
        std::map<std::pair<int, int>, WordAcc> acc;
        long max_flat = -1;
        double prev_letter_pos = -1.0;
        std::vector<double> fix_durations;
        std::vector<double> saccade_amps;
        for (const auto& e : trace.events) {
            if (e.level != TraceEvent::Level::Word || e.action != "fixate") continue;
            const long flat = geom.flat(stimulus, e.sentence, e.word);
            WordAcc& a = acc[{e.sentence, e.word}];
            // Entering a word after the gaze was past it marks a regression
            // and disqualifies the visit from first-pass accrual.
            if (flat < max_flat) {
                a.regressed = true;
                a.left = true;
            }
            // Leaving: any fixation elsewhere closes open first passes.
            for (auto& [key, other] : acc) {
                if (key.first == e.sentence && key.second == e.word) continue;
                if (other.entered) other.left = true;
            }
            if (!a.entered) a.entered = true;
            if (!a.left) {
                a.gd += e.duration_ms;
                a.first_pass += 1;
            }
            max_flat = std::max(max_flat, flat);
            fix_durations.push_back(e.duration_ms);
            const double letter_pos =
                static_cast<double>(geom.start[static_cast<std::size_t>(e.sentence)]
                                              [static_cast<std::size_t>(e.word)]) +
                e.letter;
            if (prev_letter_pos >= 0.0) saccade_amps.push_back(std::abs(letter_pos - prev_letter_pos));
            prev_letter_pos = letter_pos;
        }

        int skipped_count = 0, regressed_count = 0;
        for (const auto& [key, _] : considered) (void)_;
        for (const auto& key : considered) {
            const auto& [s, w] = key;
            const auto& words = stimulus.sentences[static_cast<std::size_t>(s)];
            WordMetricRow row;
            row.stimulus = stimulus.id;
            row.episode = static_cast<int>(ep);
            row.sentence = s;
            row.word = w;
            row.token = words[static_cast<std::size_t>(w)];
            row.length = static_cast<int>(row.token.size());
            if (ctx.lexicon->contains(row.token))
                row.log10_freq = ctx.lexicon->entry(row.token).log10_freq;
            std::vector<std::string> context(words.begin(), words.begin() + w);
            double p = 1e-9;
            if (auto ov = stimulus.predictability_override(s, w)) {
                p = *ov;
            } else if (ctx.lexicon->contains(row.token)) {
                p = ctx.predictor->predictability(context, row.token);
            }
            row.predictability = p;
            row.logit_predictability = logit(p);
            row.difficulty = std::clamp(-std::log2(std::clamp(p, 1e-12, 1.0)) / log2_vocab, 0.0, 1.0);
            auto it = acc.find(key);
            if (it != acc.end() && it->second.first_pass > 0) {
                row.gaze_duration_ms = it->second.gd;
                row.first_pass_fixations = it->second.first_pass;
                row.skipped = false;
                row.regressed_into = it->second.regressed;
            } else {
                row.skipped = true;
                row.regressed_into = it != acc.end() && it->second.regressed;
            }
            if (row.skipped) ++skipped_count;
            if (row.regressed_into) ++regressed_count;
            table.words.push_back(std::move(row));
        }

        EpisodeMetricRow erow;
        erow.stimulus = stimulus.id;
        erow.episode = static_cast<int>(ep);
        erow.total_ms = trace.total_ms;
        erow.fixation_count = trace.fixation_count;
        erow.words_per_minute = trace.total_ms > 0.0
                                    ? static_cast<double>(considered.size()) / trace.total_ms * 60000.0
                                    : 0.0;
        erow.mean_fixation_ms = fix_durations.empty()
                                    ? 0.0
                                    : std::accumulate(fix_durations.begin(), fix_durations.end(), 0.0) /
                                          static_cast<double>(fix_durations.size());
        erow.mean_saccade_letters = saccade_amps.empty()
                                        ? 0.0
                                        : std::accumulate(saccade_amps.begin(), saccade_amps.end(), 0.0) /
                                              static_cast<double>(saccade_amps.size());
        if (!considered.empty()) {
            erow.skip_rate = static_cast<double>(skipped_count) / static_cast<double>(considered.size());
            erow.regression_rate =
                static_cast<double>(regressed_count) / static_cast<double>(considered.size());
        }
        erow.comprehension = trace.comprehension;
        erow.recall = trace.recall;
        erow.mcq_accuracy = trace.mcq_accuracy;
        erow.partial = trace.partial;
        table.episodes.push_back(std::move(erow));
    }
    return table;
}

void MetricTable::write_words_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write csv: " + path);
    out << "stimulus,episode,sentence,word,token,length,log10_freq,predictability,logit_predictability,"
           "difficulty,gaze_duration_ms,first_pass_fixations,skipped,regressed_into\n";
    out.precision(10);
    for (const auto& r : words)
        out << r.stimulus << ',' << r.episode << ',' << r.sentence << ',' << r.word << ',' << r.token << ',' << r.length
            << ',' << r.log10_freq << ',' << r.predictability << ',' << r.logit_predictability << ','
            << r.difficulty << ',' << r.gaze_duration_ms << ',' << r.first_pass_fixations << ','
            << (r.skipped ? 1 : 0) << ',' << (r.regressed_into ? 1 : 0) << '\n';
}

void MetricTable::write_episodes_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write csv: " + path);
    out << "stimulus,episode,words_per_minute,mean_fixation_ms,mean_saccade_letters,fixation_count,total_ms,"
           "skip_rate,regression_rate,comprehension,recall,mcq_accuracy,partial\n";
    out.precision(10);
    for (const auto& r : episodes)
        out << r.stimulus << ',' << r.episode << ',' << r.words_per_minute << ',' << r.mean_fixation_ms << ','
            << r.mean_saccade_letters << ',' << r.fixation_count << ',' << r.total_ms << ','
            << r.skip_rate << ',' << r.regression_rate << ',' << r.comprehension << ',' << r.recall
            << ',' << r.mcq_accuracy << ',' << (r.partial ? 1 : 0) << '\n';
}

// ---- binning ----

BinnedCurve bin_means(const std::vector<double>& keys, const std::vector<double>& values,
                      int n_bins, int min_count) {
    if (keys.size() != values.size()) throw ReaderError("bin_means input size mismatch");
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    BinnedCurve curve;
    if (order.empty() || n_bins < 1) return curve;
    const std::size_t per = std::max<std::size_t>(1, order.size() / static_cast<std::size_t>(n_bins));
    for (std::size_t start = 0; start < order.size(); start += per) {
        const std::size_t end = std::min(order.size(), start + per);
        if (end - start < static_cast<std::size_t>(min_count)) continue;
        double kx = 0.0, m = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            kx += keys[order[i]];
            m += values[order[i]];
        }
        const double n = static_cast<double>(end - start);
        kx /= n;
        m /= n;
        double var = 0.0;
        for (std::size_t i = start; i < end; ++i) var += (values[order[i]] - m) * (values[order[i]] - m);
        var = var / n / n;  // variance of the bin mean
        curve.x.push_back(kx);
        curve.mean.push_back(m);
        curve.var.push_back(std::max(var, 1e-12));
        curve.count.push_back(static_cast<int>(end - start));
    }
    return curve;
}

BinnedCurve bin_means_integer(const std::vector<double>& keys, const std::vector<double>& values,
                              int min_count) {
    std::map<long, std::vector<double>> groups;
    for (std::size_t i = 0; i < keys.size(); ++i)
        groups[std::lround(keys[i])].push_back(values[i]);
    BinnedCurve curve;
    for (const auto& [k, vals] : groups) {
        if (static_cast<int>(vals.size()) < min_count) continue;
        const auto [m, sd] = mean_sd(vals);
        curve.x.push_back(static_cast<double>(k));
        curve.mean.push_back(m);
        curve.var.push_back(std::max(sd * sd / static_cast<double>(vals.size()), 1e-12));
        curve.count.push_back(static_cast<int>(vals.size()));
    }
    return curve;
}

LinearFit fit_curve(const BinnedCurve& curve) { return linear_fit(curve.x, curve.mean); }

std::pair<double, double> mean_sd(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double m = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - m) * (v - m);
    return {m, std::sqrt(var / n)};
}

void fill_lexical_curves(MetricSummary& summary, const MetricTable& table, int n_bins) {
    std::vector<double> len_f, freq_f, pred_f, gd;        // fixated words
    std::vector<double> len_a, freq_a, pred_a, diff_a;    // all considered words
    std::vector<double> skip, regress;
    for (const auto& r : table.words) {
        if (!r.skipped) {
            len_f.push_back(r.length);
            freq_f.push_back(r.log10_freq);
            pred_f.push_back(r.logit_predictability);
            gd.push_back(r.gaze_duration_ms);
        }
        len_a.push_back(r.length);
        freq_a.push_back(r.log10_freq);
        pred_a.push_back(r.logit_predictability);
        diff_a.push_back(r.difficulty);
        skip.push_back(r.skipped ? 1.0 : 0.0);
        regress.push_back(r.regressed_into ? 1.0 : 0.0);
    }
    summary.gd_by_length = bin_means_integer(len_f, gd);
    summary.gd_by_logfreq = bin_means(freq_f, gd, n_bins);
    summary.gd_by_logitpred = bin_means(pred_f, gd, n_bins);
    summary.skip_by_length = bin_means_integer(len_a, skip);
    summary.skip_by_logfreq = bin_means(freq_a, skip, n_bins);
    summary.skip_by_logitpred = bin_means(pred_a, skip, n_bins);
    summary.regression_by_difficulty = bin_means(diff_a, regress, n_bins);
}

std::vector<double> gd_histogram(const MetricTable& table, double lo, double hi, int n_bins) {
    std::vector<double> hist(static_cast<std::size_t>(n_bins), 0.0);
    double total = 0.0;
    for (const auto& r : table.words) {
        if (r.skipped) continue;
        const double t = std::clamp(r.gaze_duration_ms, lo, hi - 1e-9);
        const int b = static_cast<int>((t - lo) / (hi - lo) * n_bins);
        hist[static_cast<std::size_t>(std::clamp(b, 0, n_bins - 1))] += 1.0;
        total += 1.0;
    }
    if (total > 0.0)
        for (auto& h : hist) h /= total;
    return hist;
}

// ---- MetricSummary JSON ----

namespace {

nlohmann::json curve_to_json(const BinnedCurve& c) {
    return {{"x", c.x}, {"mean", c.mean}, {"var", c.var}, {"count", c.count}};
}

BinnedCurve curve_from_json(const nlohmann::json& j) {
    BinnedCurve c;
    if (j.is_null()) return c;
    c.x = j.value("x", std::vector<double>{});
    c.mean = j.value("mean", std::vector<double>{});
    c.var = j.value("var", std::vector<double>{});
    c.count = j.value("count", std::vector<int>{});
    return c;
}

}  // namespace

std::string MetricSummary::to_json() const {
    nlohmann::json j;
    j["gaze_duration"] = {{"by_length", curve_to_json(gd_by_length)},
                          {"by_logfreq", curve_to_json(gd_by_logfreq)},
                          {"by_logitpred", curve_to_json(gd_by_logitpred)}};
    j["skip"] = {{"by_length", curve_to_json(skip_by_length)},
                 {"by_logfreq", curve_to_json(skip_by_logfreq)},
                 {"by_logitpred", curve_to_json(skip_by_logitpred)}};
    j["regression"] = {{"by_difficulty", curve_to_json(regression_by_difficulty)}};
    j["recall"] = {{"high", recall_high},         {"high_sd", recall_high_sd},
                   {"low", recall_low},           {"low_sd", recall_low_sd},
                   {"coherent", recall_coherent}, {"coherent_sd", recall_coherent_sd},
                   {"incoherent", recall_incoherent}, {"incoherent_sd", recall_incoherent_sd}};
    nlohmann::json tp = nlohmann::json::array();
    for (const auto& c : time_pressure)
        tp.push_back({{"condition_ms", c.condition_ms},
                      {"wpm", c.wpm},
                      {"wpm_sd", c.wpm_sd},
                      {"skip", c.skip},
                      {"skip_sd", c.skip_sd},
                      {"regression", c.regression},
                      {"regression_sd", c.regression_sd},
                      {"mcq", c.mcq},
                      {"mcq_sd", c.mcq_sd},
                      {"recall", c.recall},
                      {"recall_sd", c.recall_sd}});
    j["time_pressure"] = std::move(tp);
    if (!gd_histogram.empty())
        j["gd_histogram"] = {{"lo", gd_histogram_lo}, {"hi", gd_histogram_hi}, {"p", gd_histogram}};
    return j.dump(2);
}

MetricSummary MetricSummary::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("bad metric summary json: ") + e.what());
    }
    MetricSummary s;
    if (j.contains("gaze_duration")) {
        s.gd_by_length = curve_from_json(j["gaze_duration"].value("by_length", nlohmann::json()));
        s.gd_by_logfreq = curve_from_json(j["gaze_duration"].value("by_logfreq", nlohmann::json()));
        s.gd_by_logitpred = curve_from_json(j["gaze_duration"].value("by_logitpred", nlohmann::json()));
    }
    if (j.contains("skip")) {
        s.skip_by_length = curve_from_json(j["skip"].value("by_length", nlohmann::json()));
        s.skip_by_logfreq = curve_from_json(j["skip"].value("by_logfreq", nlohmann::json()));
        s.skip_by_logitpred = curve_from_json(j["skip"].value("by_logitpred", nlohmann::json()));
    }
    if (j.contains("regression"))
        s.regression_by_difficulty =
            curve_from_json(j["regression"].value("by_difficulty", nlohmann::json()));
    if (j.contains("recall")) {
        const auto& r = j["recall"];
        s.recall_high = r.value("high", -1.0);
        s.recall_high_sd = r.value("high_sd", 0.0);
        s.recall_low = r.value("low", -1.0);
        s.recall_low_sd = r.value("low_sd", 0.0);
        s.recall_coherent = r.value("coherent", -1.0);
        s.recall_coherent_sd = r.value("coherent_sd", 0.0);
        s.recall_incoherent = r.value("incoherent", -1.0);
        s.recall_incoherent_sd = r.value("incoherent_sd", 0.0);
    }
    if (j.contains("time_pressure"))
        for (const auto& c : j["time_pressure"]) {
            TimePressureCell cell;
            cell.condition_ms = c.value("condition_ms", 0.0);
            cell.wpm = c.value("wpm", 0.0);
            cell.wpm_sd = c.value("wpm_sd", 0.0);
            cell.skip = c.value("skip", 0.0);
            cell.skip_sd = c.value("skip_sd", 0.0);
            cell.regression = c.value("regression", 0.0);
            cell.regression_sd = c.value("regression_sd", 0.0);
            cell.mcq = c.value("mcq", 0.0);
            cell.mcq_sd = c.value("mcq_sd", 0.0);
            cell.recall = c.value("recall", 0.0);
            cell.recall_sd = c.value("recall_sd", 0.0);
            s.time_pressure.push_back(cell);
        }
    if (j.contains("gd_histogram")) {
        s.gd_histogram = j["gd_histogram"].value("p", std::vector<double>{});
        s.gd_histogram_lo = j["gd_histogram"].value("lo", 0.0);
        s.gd_histogram_hi = j["gd_histogram"].value("hi", 0.0);
    }
    return s;
}

MetricSummary MetricSummary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReaderError("cannot open metric summary: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void MetricSummary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write metric summary: " + path);
    out << to_json();
}

}  // namespace reader::eval
