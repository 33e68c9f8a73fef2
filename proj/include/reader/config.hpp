#pragma once

#include <map>
#include <string>
#include <vector>

#include "reader/ppo.hpp"
#include "reader/rollout.hpp"

namespace reader {

// Full run configuration, read from a `[section]` / `key = value` text file.
// Section and key names mirror the struct fields below.
struct RunConfig {
    struct Paths {
        std::string data_dir = "out/world";   // generated lexicon/corpus/stimuli
        std::string reference;                 // human reference summary (JSON)
        std::string checkpoint_dir = "out/checkpoints";
        std::string output_dir = "out";
    } paths;

    AcuityConfig vision;
    DurationParams duration;
    AppraisalConfig appraisal;

    struct Memory {
        int c_stm = 5;
        double tau = 0.32;
        double tau_high = 0.838;
        double tau_low = 0.844;
        double delta = 0.6;
        double phi_floor = 0.01;
        double recall_threshold = 0.5;
    } memory;

    struct Rewards {
        double step_cost = 0.1;
        double w_reg = 0.8;
        double r_comp = 100.0;
        double r_fail = 100.0;
    } rewards;

    struct Time {
        double total_ms = 0.0;  // 0 = unconstrained
        double w_il = 0.70;
        double w_rp = 1.30;
        double w_tp = 1.0;
        double overtime_penalty = 0.05;
        double reference_step_ms = 250.0;
    } time;

    struct Ngram {
        int order = 3;
        double add_k = 0.1;
    } ngram;

    rl::TrainConfig train;

    struct Sim {
        int episodes = 100;
        int jobs = 1;
        std::uint64_t seed = 1;
        bool svg = false;
    } sim;

    struct Ablation {
        bool unlimited_memory = false;
        double myopic_gamma = 0.0;  // 0 = off
        bool full_vision = false;
    } ablation;

    struct Datagen {
        int vocabulary_size = 2000;
        int corpus_sentences = 4000;
        int natural_stimuli = 12;
        int sentences_per_stimulus = 10;
        std::uint64_t seed = 20240101;
    } datagen;

    // Bounds enforcement (throws ConfigError on violation).
    void validate() const;

    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;

    // Assembles the simulation context over loaded resources. The ablation
    // block and knowledge condition are applied here.
    SimContext make_context(const Lexicon* lexicon, const ContextPredictor* predictor,
                            const std::string& knowledge_condition = "") const;
    TimeBudget make_budget() const;
};

}  // namespace reader
