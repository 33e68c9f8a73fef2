#include "reader/text_reader.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "reader/errors.hpp"

namespace reader {

namespace {

const std::unordered_set<std::string>& stopword_set() {
    static const std::unordered_set<std::string> kStopwords = {
        "a", "an", "the", "and", "or", "but", "if", "then", "so", "as", "of", "at",
        "by", "for", "with", "about", "into", "onto", "from", "to", "in", "on", "up",
        "out", "off", "over", "under", "near", "is", "am", "are", "was", "were", "be",
        "been", "being", "do", "does", "did", "have", "has", "had", "will", "would",
        "can", "could", "may", "might", "shall", "should", "must", "it", "its", "this",
        "that", "these", "those", "he", "she", "they", "them", "his", "her", "their",
        "we", "us", "our", "you", "your", "i", "me", "my", "not", "no", "nor", "very",
        "there", "here", "when", "while", "which", "who", "whom", "what", "how", "why",
        "all", "any", "both", "each", "few", "more", "most", "some", "such", "than",
        "too", "also", "just", "only", "own", "same",
    };
    return kStopwords;
}

constexpr double kRelevanceAlpha = 0.5;
constexpr const char* kRelationTag = "rel";

}  // namespace

bool is_stopword(const std::string& word) { return stopword_set().count(word) != 0; }

std::vector<Proposition> parse_propositions(const std::vector<std::string>& sentence_words,
                                            int source_sentence) {
    std::vector<std::string> content;
    for (const auto& w : sentence_words)
        if (!w.empty() && !is_stopword(w)) content.push_back(w);
    std::vector<Proposition> props;
    for (std::size_t i = 0; i + 1 < content.size(); ++i) {
        Proposition p;
        p.subject = content[i];
        p.relation = kRelationTag;
        p.object = content[i + 1];
        p.source_sentence = source_sentence;
        props.push_back(std::move(p));
    }
    return props;
}

// ---- LongTermMemory ----

std::string LongTermMemory::key(const std::string& a, const std::string& b) {
    return a <= b ? a + "\x1f" + b : b + "\x1f" + a;
}

double LongTermMemory::encounter(const Proposition& prop, double rel) {
    const std::string k = key(prop.subject, prop.object);
    auto it = index_.find(k);
    if (it == index_.end()) {
        Proposition stored = prop;
        stored.activation = rel;
        index_[k] = store_.size();
        store_.push_back(std::move(stored));
        return rel;
    }
    Proposition& stored = store_[it->second];
    const double reinforced = stored.activation + (1.0 - stored.activation) * delta_;
    stored.activation = std::max(reinforced, rel);
    return stored.activation;
}

bool LongTermMemory::contains(const std::string& subject, const std::string& object) const {
    return index_.count(key(subject, object)) != 0;
}

double LongTermMemory::activation(const std::string& subject, const std::string& object) const {
    auto it = index_.find(key(subject, object));
    return it == index_.end() ? 0.0 : store_[it->second].activation;
}

double LongTermMemory::concept_strength(const std::string& term) const {
    double best = 0.0;
    for (const auto& p : store_) {
        if (p.activation < tau_) continue;  // not consolidated
        if (p.subject == term || p.object == term) best = std::max(best, p.activation);
    }
    return best;
}

std::vector<Proposition> LongTermMemory::consolidated() const {
    std::vector<Proposition> out;
    for (const auto& p : store_)
        if (p.activation >= tau_) out.push_back(p);
    return out;
}

double relevance(const Proposition& prop, const LongTermMemory& ltm,
                 const std::vector<std::string>& previous_gist_concepts) {
    auto strength = [&](const std::string& term) {
        for (const auto& g : previous_gist_concepts)
            if (g == term) return 1.0;
        return ltm.concept_strength(term);
    };
    const double overlap = strength(prop.subject) + strength(prop.object);
    return (overlap + kRelevanceAlpha) / (2.0 + kRelevanceAlpha);
}

IntegrationResult integrate_sentence(LongTermMemory& ltm, const std::vector<Proposition>& props,
                                     int c_stm, const std::vector<std::string>& previous_gist_concepts,
                                     double phi_floor) {
    IntegrationResult out;
    if (props.empty()) {
        out.phi_raw = phi_floor;
        return out;
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(props.size());
    for (std::size_t i = 0; i < props.size(); ++i)
        scored.emplace_back(relevance(props[i], ltm, previous_gist_concepts), i);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, c_stm)),
                                                   scored.size());
    double rel_sum = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
        const auto& [rel, idx] = scored[i];
        Proposition gist_prop = props[idx];
        gist_prop.activation = ltm.encounter(props[idx], rel);
        out.gist.push_back(std::move(gist_prop));
        out.gist_relevance.push_back(rel);
        rel_sum += rel;
    }
    out.phi_raw = keep > 0 ? rel_sum / static_cast<double>(keep) : phi_floor;
    return out;
}

double coherence_appraisal(double phi_raw, double sentence_comprehension) {
    return std::sqrt(std::max(0.0, phi_raw) * std::max(0.0, sentence_comprehension));
}

double text_comprehension(const std::vector<std::optional<double>>& phi, double phi_floor) {
    bool any_read = false;
    for (const auto& p : phi)
        if (p) any_read = true;
    if (!any_read) return 0.0;
    std::vector<double> vals;
    vals.reserve(phi.size());
    for (const auto& p : phi) vals.push_back(p ? *p : phi_floor);
    return geometric_mean(vals);
}

namespace {
bool concepts_match(const std::string& s1, const std::string& o1, const std::string& s2,
                    const std::string& o2) {
    return (s1 == s2 && o1 == o2) || (s1 == o2 && o1 == s2);
}
}  // namespace

double recall_proportion(const LongTermMemory& ltm,
                         const std::vector<std::array<std::string, 3>>& gold_props,
                         double recall_threshold) {
    if (gold_props.empty()) throw Unavailable("stimulus carries no gold propositions");
    const double gate = std::max(ltm.tau(), recall_threshold);
    std::size_t matched = 0;
    for (const auto& g : gold_props) {
        bool hit = false;
        for (const auto& p : ltm.store()) {
            if (p.activation < gate) continue;
            if (concepts_match(p.subject, p.object, g[0], g[2])) {
                hit = true;
                break;
            }
        }
        if (hit) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(gold_props.size());
}

bool mcq_probe(const LongTermMemory& ltm, const McqQuestion& question) {
    auto evidence = [&](const std::array<std::string, 2>& option) {
        double sum = 0.0;
        for (const auto& p : ltm.store()) {
            if (p.activation < ltm.tau()) continue;
            if (concepts_match(p.subject, p.object, option[0], option[1])) sum += p.activation;
        }
        return sum;
    };
    const double target_score = evidence(question.target);
    for (const auto& d : question.distractors)
        if (evidence(d) >= target_score) return false;  // ties count as incorrect
    return target_score > 0.0;
}

std::vector<McqQuestion> build_mcq_questions(const Stimulus& stimulus, int distractors_per_question,
                                             std::uint64_t seed) {
    std::vector<McqQuestion> questions;
    const auto& gold = stimulus.gold_propositions;
    if (gold.empty()) return questions;
    // Concept pool for forging distractors.
    std::vector<std::string> concepts;
    std::unordered_set<std::string> seen;
    for (const auto& g : gold) {
        if (seen.insert(g[0]).second) concepts.push_back(g[0]);
        if (seen.insert(g[2]).second) concepts.push_back(g[2]);
    }
    std::unordered_set<std::string> gold_keys;
    for (const auto& g : gold)
        gold_keys.insert(g[0] <= g[2] ? g[0] + "|" + g[2] : g[2] + "|" + g[0]);
    Rng rng(seed);
    for (const auto& g : gold) {
        McqQuestion q;
        q.target = {g[0], g[2]};
        int guard = 0;
        while (static_cast<int>(q.distractors.size()) < distractors_per_question && guard < 200) {
            ++guard;
            // Corrupt the object; keep the subject so distractors stay plausible.
            const std::string& other = concepts[rng.index(concepts.size())];
            if (other == g[0] || other == g[2]) continue;
            const std::string k = g[0] <= other ? g[0] + "|" + other : other + "|" + g[0];
            if (gold_keys.count(k)) continue;  // never use a true proposition as a distractor
            q.distractors.push_back({g[0], other});
        }
        if (!q.distractors.empty()) questions.push_back(std::move(q));
    }
    return questions;
}

// ---- TextEnv ----

int TextEnv::sentences_read() const {
    int read = 0;
    for (const auto& p : phi_)
        if (p) ++read;
    return read;
}

void TextEnv::rebuild_observation() {
    obs_ = TextObservation{};
    obs_.k = k_;
    obs_.n_sentences = n();
    obs_.phi_current =
        (k_ >= 0 && phi_[static_cast<std::size_t>(k_)]) ? *phi_[static_cast<std::size_t>(k_)] : 0.0;
    std::vector<double> set;
    for (const auto& p : phi_)
        if (p) set.push_back(*p);
    obs_.running_score = geometric_mean(set);
    obs_.phi_window.assign(static_cast<std::size_t>(params_.regress_window), 1.0);
    for (int r = 1; r <= params_.regress_window; ++r) {
        const int idx = k_ - r;
        if (idx >= 0 && phi_[static_cast<std::size_t>(idx)])
            obs_.phi_window[static_cast<std::size_t>(r - 1)] = *phi_[static_cast<std::size_t>(idx)];
    }
    obs_.frac_read = n() > 0 ? static_cast<double>(sentences_read()) / n() : 0.0;
    obs_.progress = obs_.frac_read;
    obs_.steps = steps_;
    obs_.max_steps = max_steps_;
    if (budget_ && budget_->limited()) {
        obs_.remaining_time_frac = budget_->remaining_frac();
        obs_.remaining_abs = std::min(2.0, std::max(0.0, budget_->remaining_ms()) / 60000.0);
    }
}

TextObservation TextEnv::reset(const Stimulus* stimulus, Rng& rng) {
    (void)rng;
    stimulus_ = stimulus;
    k_ = -1;
    phi_.assign(stimulus->sentence_count(), std::nullopt);
    phi_raw_.assign(stimulus->sentence_count(), 0.0);
    previous_gist_.clear();
    ltm_ = LongTermMemory(params_.tau, params_.delta);
    steps_ = 0;
    max_steps_ = params_.max_steps_per_sentence * n() + 10;
    done_ = false;
    final_score_ = 0.0;
    rebuild_observation();
    return obs_;
}

double TextEnv::terminal_bonus(double score) const {
    if (!budget_ || !budget_->limited()) return 0.0;
    const double progress = n() > 0 ? static_cast<double>(sentences_read()) / n() : 0.0;
    return budget_->w_tp * budget_->w_rp * params_.r_comp * score * progress;
}

void TextEnv::read_sentence(int target, TextStepResult& out, Rng& rng) {
    out.sentence_index = target;
    SentenceEpisodeSummary sent = runner_(target, rng);
    out.sentence = sent;
    out.sentence_score = sent.score;

    // Build propositions from what the reader actually committed.
    std::vector<Proposition> props;
    if (params_.use_gold_propositions) {
        // Gold propositions attach to the sentences that mention both concepts.
        const auto& words = stimulus_->sentences[static_cast<std::size_t>(target)];
        auto mentions = [&](const std::string& c) {
            return std::find(words.begin(), words.end(), c) != words.end();
        };
        for (const auto& g : stimulus_->gold_propositions) {
            if (!mentions(g[0]) || !mentions(g[2])) continue;
            Proposition p;
            p.subject = g[0];
            p.relation = g[1];
            p.object = g[2];
            p.source_sentence = target;
            props.push_back(std::move(p));
        }
    } else {
        std::vector<std::string> words;
        for (std::size_t i = 0; i < sent.committed.size(); ++i)
            if (sent.committed[i]) words.push_back(*sent.committed[i]);
        props = parse_propositions(words, target);
    }

    IntegrationResult integ =
        integrate_sentence(ltm_, props, params_.c_stm, previous_gist_, params_.phi_floor);
    phi_raw_[static_cast<std::size_t>(target)] = integ.phi_raw;
    previous_gist_.clear();
    for (const auto& g : integ.gist) {
        previous_gist_.push_back(g.subject);
        previous_gist_.push_back(g.object);
    }

    const double fresh = coherence_appraisal(integ.phi_raw, sent.score);
    auto& phi = phi_[static_cast<std::size_t>(target)];
    // Rereading never lowers an appraisal.
    phi = phi ? std::max(*phi, fresh) : fresh;
    out.phi = *phi;
    k_ = target;
}

TextStepResult TextEnv::step(const TextAction& action, Rng& rng) {
    if (done_) throw EpisodeDone();
    TextStepResult out;
    out.action = action;

    if (budget_ && budget_->expired()) {
        // Time expired: terminate with the comprehension accumulated so far.
        done_ = true;
        out.done = true;
        out.forced_by_time = true;
        out.all_read = sentences_read() == n();
        final_score_ = text_comprehension(phi_, params_.phi_floor);
        out.final_score = final_score_;
        out.reward = params_.r_comp * final_score_ + terminal_bonus(final_score_);
        rebuild_observation();
        out.observation = obs_;
        return out;
    }

    ++steps_;
    const bool forced_stop = steps_ >= max_steps_ && action.kind != TextAction::Kind::Stop;
    const bool stopping = action.kind == TextAction::Kind::Stop || forced_stop;

    if (stopping) {
        done_ = true;
        out.done = true;
        out.all_read = sentences_read() == n();
        final_score_ = text_comprehension(phi_, params_.phi_floor);
        out.final_score = final_score_;
        const double base = out.all_read ? params_.r_comp * final_score_ : -params_.r_fail;
        out.reward = base + terminal_bonus(final_score_);
    } else if (action.kind == TextAction::Kind::Next) {
        const int target = k_ + 1;
        if (target >= n()) throw InvalidAction("no next sentence to read");
        read_sentence(target, out, rng);
        out.reward = -params_.step_cost;
    } else {  // Regress
        if (k_ < 1) throw InvalidAction("regress with no prior sentences");
        const int target = std::max(0, k_ - std::max(1, action.regress_offset));
        read_sentence(target, out, rng);
        out.reward = -params_.step_cost;
    }

    rebuild_observation();
    out.observation = obs_;
    return out;
}

}  // namespace reader
