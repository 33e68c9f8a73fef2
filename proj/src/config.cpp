#include "reader/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "reader/errors.hpp"

namespace reader {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct KvReader {
    std::map<std::string, std::string> values;  // "section.key" -> value

    void set_if(const std::string& key, double& out) const {
        auto it = values.find(key);
        if (it == values.end()) return;
        try {
            out = std::stod(it->second);
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value for " + key + ": " + it->second);
        }
    }
    void set_if(const std::string& key, int& out) const {
        auto it = values.find(key);
        if (it == values.end()) return;
        try {
            out = std::stoi(it->second);
        } catch (const std::exception&) {
            throw ConfigError("bad integer value for " + key + ": " + it->second);
        }
    }
    void set_if(const std::string& key, std::uint64_t& out) const {
        auto it = values.find(key);
        if (it == values.end()) return;
        try {
            out = std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("bad integer value for " + key + ": " + it->second);
        }
    }
    void set_if(const std::string& key, bool& out) const {
        auto it = values.find(key);
        if (it == values.end()) return;
        const std::string v = it->second;
        if (v == "true" || v == "1" || v == "yes") out = true;
        else if (v == "false" || v == "0" || v == "no") out = false;
        else throw ConfigError("bad boolean value for " + key + ": " + v);
    }
    void set_if(const std::string& key, std::string& out) const {
        auto it = values.find(key);
        if (it != values.end()) out = it->second;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
    KvReader kv;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("malformed section at line " + std::to_string(lineno));
            section = t.substr(1, t.size() - 2);
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        kv.values[section.empty() ? key : section + "." + key] = value;
    }

    RunConfig c;
    kv.set_if("paths.data_dir", c.paths.data_dir);
    kv.set_if("paths.reference", c.paths.reference);
    kv.set_if("paths.checkpoint_dir", c.paths.checkpoint_dir);
    kv.set_if("paths.output_dir", c.paths.output_dir);

    kv.set_if("vision.n_fov", c.vision.n_fov);
    kv.set_if("vision.n_parafov", c.vision.n_parafov);
    kv.set_if("vision.epsilon0", c.vision.epsilon0);
    kv.set_if("vision.epsilon_slope", c.vision.epsilon_slope);
    kv.set_if("vision.alphabet_size", c.vision.alphabet_size);
    kv.set_if("vision.lambda_len", c.vision.lambda_len);

    kv.set_if("duration.d0", c.duration.d0);
    kv.set_if("duration.kappa", c.duration.kappa);
    kv.set_if("duration.clip_lo", c.duration.clip_lo);
    kv.set_if("duration.clip_hi", c.duration.clip_hi);
    kv.set_if("duration.gamma_shape", c.duration.gamma_shape);
    kv.set_if("duration.d_saccade", c.duration.d_saccade);
    kv.set_if("duration.rho", c.duration.rho);

    kv.set_if("appraisal.surprisal_scale", c.appraisal.surprisal_scale);
    kv.set_if("appraisal.eta", c.appraisal.eta);
    kv.set_if("appraisal.psi_floor", c.appraisal.psi_floor);

    kv.set_if("memory.c_stm", c.memory.c_stm);
    kv.set_if("memory.tau", c.memory.tau);
    kv.set_if("memory.tau_high", c.memory.tau_high);
    kv.set_if("memory.tau_low", c.memory.tau_low);
    kv.set_if("memory.delta", c.memory.delta);
    kv.set_if("memory.phi_floor", c.memory.phi_floor);
    kv.set_if("memory.recall_threshold", c.memory.recall_threshold);

    kv.set_if("rewards.step_cost", c.rewards.step_cost);
    kv.set_if("rewards.w_reg", c.rewards.w_reg);
    kv.set_if("rewards.r_comp", c.rewards.r_comp);
    kv.set_if("rewards.r_fail", c.rewards.r_fail);

    kv.set_if("time.total_ms", c.time.total_ms);
    kv.set_if("time.w_il", c.time.w_il);
    kv.set_if("time.w_rp", c.time.w_rp);
    kv.set_if("time.w_tp", c.time.w_tp);
    kv.set_if("time.overtime_penalty", c.time.overtime_penalty);
    kv.set_if("time.reference_step_ms", c.time.reference_step_ms);

    kv.set_if("ngram.order", c.ngram.order);
    kv.set_if("ngram.add_k", c.ngram.add_k);

    kv.set_if("train.gamma", c.train.gamma);
    kv.set_if("train.clip_ratio", c.train.clip_ratio);
    kv.set_if("train.gae_lambda", c.train.gae_lambda);
    kv.set_if("train.learning_rate", c.train.learning_rate);
    kv.set_if("train.rollout_horizon", c.train.rollout_horizon);
    kv.set_if("train.minibatch", c.train.minibatch);
    kv.set_if("train.epochs", c.train.epochs);
    kv.set_if("train.updates", c.train.updates);
    kv.set_if("train.hidden", c.train.hidden);
    kv.set_if("train.entropy_coef", c.train.entropy_coef);
    kv.set_if("train.value_coef", c.train.value_coef);
    kv.set_if("train.seed", c.train.seed);
    kv.set_if("train.eval_episodes", c.train.eval_episodes);

    kv.set_if("sim.episodes", c.sim.episodes);
    kv.set_if("sim.jobs", c.sim.jobs);
    kv.set_if("sim.seed", c.sim.seed);
    kv.set_if("sim.svg", c.sim.svg);

    kv.set_if("ablation.unlimited_memory", c.ablation.unlimited_memory);
    kv.set_if("ablation.myopic_gamma", c.ablation.myopic_gamma);
    kv.set_if("ablation.full_vision", c.ablation.full_vision);

    kv.set_if("datagen.vocabulary_size", c.datagen.vocabulary_size);
    kv.set_if("datagen.corpus_sentences", c.datagen.corpus_sentences);
    kv.set_if("datagen.natural_stimuli", c.datagen.natural_stimuli);
    kv.set_if("datagen.sentences_per_stimulus", c.datagen.sentences_per_stimulus);
    kv.set_if("datagen.seed", c.datagen.seed);
    return c;
}

std::string RunConfig::serialize() const {
    std::ostringstream o;
    o << "[paths]\n";
    o << "data_dir = " << paths.data_dir << "\n";
    o << "reference = " << paths.reference << "\n";
    o << "checkpoint_dir = " << paths.checkpoint_dir << "\n";
    o << "output_dir = " << paths.output_dir << "\n";
    o << "[vision]\n";
    o << "n_fov = " << vision.n_fov << "\n";
    o << "n_parafov = " << vision.n_parafov << "\n";
    o << "epsilon0 = " << fmt(vision.epsilon0) << "\n";
    o << "epsilon_slope = " << fmt(vision.epsilon_slope) << "\n";
    o << "alphabet_size = " << vision.alphabet_size << "\n";
    o << "lambda_len = " << fmt(vision.lambda_len) << "\n";
    o << "[duration]\n";
    o << "d0 = " << fmt(duration.d0) << "\n";
    o << "kappa = " << fmt(duration.kappa) << "\n";
    o << "clip_lo = " << fmt(duration.clip_lo) << "\n";
    o << "clip_hi = " << fmt(duration.clip_hi) << "\n";
    o << "gamma_shape = " << fmt(duration.gamma_shape) << "\n";
    o << "d_saccade = " << fmt(duration.d_saccade) << "\n";
    o << "rho = " << fmt(duration.rho) << "\n";
    o << "[appraisal]\n";
    o << "surprisal_scale = " << fmt(appraisal.surprisal_scale) << "\n";
    o << "eta = " << fmt(appraisal.eta) << "\n";
    o << "psi_floor = " << fmt(appraisal.psi_floor) << "\n";
    o << "[memory]\n";
    o << "c_stm = " << memory.c_stm << "\n";
    o << "tau = " << fmt(memory.tau) << "\n";
    o << "tau_high = " << fmt(memory.tau_high) << "\n";
    o << "tau_low = " << fmt(memory.tau_low) << "\n";
    o << "delta = " << fmt(memory.delta) << "\n";
    o << "phi_floor = " << fmt(memory.phi_floor) << "\n";
    o << "recall_threshold = " << fmt(memory.recall_threshold) << "\n";
    o << "[rewards]\n";
    o << "step_cost = " << fmt(rewards.step_cost) << "\n";
    o << "w_reg = " << fmt(rewards.w_reg) << "\n";
    o << "r_comp = " << fmt(rewards.r_comp) << "\n";
    o << "r_fail = " << fmt(rewards.r_fail) << "\n";
    o << "[time]\n";
    o << "total_ms = " << fmt(time.total_ms) << "\n";
    o << "w_il = " << fmt(time.w_il) << "\n";
    o << "w_rp = " << fmt(time.w_rp) << "\n";
    o << "w_tp = " << fmt(time.w_tp) << "\n";
    o << "overtime_penalty = " << fmt(time.overtime_penalty) << "\n";
    o << "reference_step_ms = " << fmt(time.reference_step_ms) << "\n";
    o << "[ngram]\n";
    o << "order = " << ngram.order << "\n";
    o << "add_k = " << fmt(ngram.add_k) << "\n";
    o << "[train]\n";
    o << "gamma = " << fmt(train.gamma) << "\n";
    o << "clip_ratio = " << fmt(train.clip_ratio) << "\n";
    o << "gae_lambda = " << fmt(train.gae_lambda) << "\n";
    o << "learning_rate = " << fmt(train.learning_rate) << "\n";
    o << "rollout_horizon = " << train.rollout_horizon << "\n";
    o << "minibatch = " << train.minibatch << "\n";
    o << "epochs = " << train.epochs << "\n";
    o << "updates = " << train.updates << "\n";
    o << "hidden = " << train.hidden << "\n";
    o << "entropy_coef = " << fmt(train.entropy_coef) << "\n";
    o << "value_coef = " << fmt(train.value_coef) << "\n";
    o << "seed = " << train.seed << "\n";
    o << "eval_episodes = " << train.eval_episodes << "\n";
    o << "[sim]\n";
    o << "episodes = " << sim.episodes << "\n";
    o << "jobs = " << sim.jobs << "\n";
    o << "seed = " << sim.seed << "\n";
    o << "svg = " << (sim.svg ? "true" : "false") << "\n";
    o << "[ablation]\n";
    o << "unlimited_memory = " << (ablation.unlimited_memory ? "true" : "false") << "\n";
    o << "myopic_gamma = " << fmt(ablation.myopic_gamma) << "\n";
    o << "full_vision = " << (ablation.full_vision ? "true" : "false") << "\n";
    o << "[datagen]\n";
    o << "vocabulary_size = " << datagen.vocabulary_size << "\n";
    o << "corpus_sentences = " << datagen.corpus_sentences << "\n";
    o << "natural_stimuli = " << datagen.natural_stimuli << "\n";
    o << "sentences_per_stimulus = " << datagen.sentences_per_stimulus << "\n";
    o << "seed = " << datagen.seed << "\n";
    return o.str();
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << serialize();
}

void RunConfig::validate() const {
    if (!ablation.full_vision) {
        if (vision.n_fov < 7 || vision.n_fov > 9)
            throw ConfigError("vision.n_fov must be in [7,9] letters");
        if (vision.n_parafov > 3 || vision.n_parafov < 0)
            throw ConfigError("vision.n_parafov must be in [0,3] letters");
    }
    vision.validate();
    duration.validate();
    if (!ablation.unlimited_memory && (memory.c_stm < 5 || memory.c_stm > 9))
        throw ConfigError("memory.c_stm must be in [5,9]");
    for (double tau : {memory.tau, memory.tau_high, memory.tau_low})
        if (tau < 0.0 || tau > 1.0) throw ConfigError("memory thresholds must be in [0,1]");
    if (memory.delta <= 0.0 || memory.delta >= 1.0)
        throw ConfigError("memory.delta must be in (0,1)");
    if (time.w_il < 0.0 || time.w_il > 1.0) throw ConfigError("time.w_il must be in [0,1]");
    if (time.w_rp < 0.0 || time.w_rp > 3.0) throw ConfigError("time.w_rp must be in [0,3]");
    if (rewards.w_reg < 0.0 || rewards.w_reg > 1.0)
        throw ConfigError("rewards.w_reg must be in [0,1]");
    if (appraisal.surprisal_scale <= 0.0)
        throw ConfigError("appraisal.surprisal_scale must be > 0");
    if (appraisal.eta <= 0.0 || appraisal.eta >= 1.0)
        throw ConfigError("appraisal.eta must be in (0,1)");
    if (train.gamma <= 0.0 || train.gamma > 1.0) throw ConfigError("train.gamma must be in (0,1]");
    if (train.clip_ratio <= 0.0 || train.clip_ratio > 0.5)
        throw ConfigError("train.clip_ratio must be in (0,0.5]");
    if (ngram.order < 1) throw ConfigError("ngram.order must be >= 1");
    if (ngram.add_k <= 0.0) throw ConfigError("ngram.add_k must be > 0");
}

SimContext RunConfig::make_context(const Lexicon* lexicon, const ContextPredictor* predictor,
                                   const std::string& knowledge_condition) const {
    SimContext ctx;
    ctx.lexicon = lexicon;
    ctx.predictor = predictor;

    AcuityConfig acuity = vision;
    if (ablation.full_vision) {
        acuity.n_fov = 64;
        acuity.n_parafov = 3;
        acuity.epsilon0 = 0.0;
        acuity.epsilon_slope = 0.0;
    }
    ctx.word_params.acuity = acuity;
    ctx.word_params.duration = duration;
    ctx.word_params.step_cost = rewards.step_cost;
    ctx.word_params.reward_correct = rewards.r_comp;
    ctx.word_params.reward_wrong = -rewards.r_comp;

    ctx.sentence_params.acuity = acuity;
    ctx.sentence_params.duration = duration;
    ctx.sentence_params.appraisal = appraisal;
    ctx.sentence_params.c_stm = ablation.unlimited_memory ? 64 : memory.c_stm;
    ctx.sentence_params.step_cost = rewards.step_cost;
    ctx.sentence_params.w_reg = rewards.w_reg;
    ctx.sentence_params.r_comp = rewards.r_comp;
    ctx.sentence_params.r_fail = rewards.r_fail;

    ctx.text_params.appraisal = appraisal;
    ctx.text_params.c_stm = ablation.unlimited_memory ? 1 << 16 : memory.c_stm;
    double tau = memory.tau;
    if (knowledge_condition == "high") tau = memory.tau_high;
    else if (knowledge_condition == "low") tau = memory.tau_low;
    if (ablation.unlimited_memory) tau = 0.0;
    ctx.text_params.tau = tau;
    ctx.text_params.delta = memory.delta;
    ctx.text_params.phi_floor = memory.phi_floor;
    ctx.text_params.step_cost = rewards.step_cost;
    ctx.text_params.r_comp = rewards.r_comp;
    ctx.text_params.r_fail = rewards.r_fail;
    ctx.recall_threshold = memory.recall_threshold;
    return ctx;
}

TimeBudget RunConfig::make_budget() const {
    TimeBudget b;
    b.total_ms = time.total_ms;
    b.w_il = time.w_il;
    b.w_rp = time.w_rp;
    b.w_tp = time.w_tp;
    b.overtime_penalty = time.overtime_penalty;
    b.reference_step_ms = time.reference_step_ms;
    return b;
}

}  // namespace reader
