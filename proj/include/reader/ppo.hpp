#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "reader/net.hpp"

namespace reader::rl {

// Minimal environment surface the trainer needs. Episodes restart
// automatically inside collect(); masks are 1-bit-per-action.
class RlEnv {
public:
    virtual ~RlEnv() = default;
    virtual std::vector<double> reset(Rng& rng) = 0;
    virtual std::uint32_t action_mask() const = 0;
    struct Step {
        std::vector<double> features;
        double reward = 0.0;
        bool done = false;
    };
    virtual Step step(int action, Rng& rng) = 0;
    virtual int feature_dim() const = 0;
    virtual int action_count() const = 0;
};

struct TrainConfig {
    double gamma = 0.99;
    double clip_ratio = 0.2;
    double gae_lambda = 0.95;
    double learning_rate = 3e-4;
    int rollout_horizon = 2048;
    int minibatch = 256;
    int epochs = 4;
    int updates = 200;
    int hidden = 64;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    double max_grad_norm = 0.5;
    double reward_scale = 100.0;  // trainer-internal reward divisor
    std::uint64_t seed = 1;
    double myopic_gamma = 0.0;  // > 0 overrides gamma (ablation)
    int eval_episodes = 200;    // post-training comparison vs the random policy
    double baseline_margin = 0.0;

    double effective_gamma() const { return myopic_gamma > 0.0 ? myopic_gamma : gamma; }
};

// One experience tuple gathered on-policy.
struct Transition {
    std::vector<double> features;
    std::uint32_t mask = 0;
    int action = 0;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    bool done = false;
    double advantage = 0.0;
    double value_target = 0.0;
};

// Generalized advantage estimation over a horizon with bootstrapped tail.
void compute_gae(std::vector<Transition>& batch, double bootstrap_value, double gamma,
                 double lambda);

// Mean clipped-surrogate policy loss over the batch (the quantity whose
// gradient the finite-difference check validates). Advantages and old log
// probabilities are frozen inputs.
double clipped_surrogate_loss(const PolicyNet& net, const std::vector<Transition>& batch,
                              double clip_ratio, std::vector<double>* grad);

// Full PPO loss: surrogate + value_coef * value MSE - entropy_coef * entropy.
double ppo_loss(const PolicyNet& net, const std::vector<Transition>& batch, double clip_ratio,
                double value_coef, double entropy_coef, std::vector<double>* grad);

struct TrainResult {
    PolicyNet net;
    std::vector<double> return_curve;   // mean episode return per update
    double eval_mean_return = 0.0;      // trained policy, held-out seeds
    double random_mean_return = 0.0;    // uniform-over-valid-actions baseline
    bool beat_baseline = false;
    int updates_run = 0;
};

double discounted_return(const std::vector<double>& rewards, double gamma);

// On-policy clipped-surrogate training. Throws TrainingDiverged (carrying no
// usable parameters) if the loss goes non-finite and no finite checkpoint
// exists; otherwise the last finite checkpoint is returned.
TrainResult train(RlEnv& env, const TrainConfig& cfg);

// Mean episode return of a fixed policy (nullptr = uniform random over the mask).
double evaluate_policy(RlEnv& env, const PolicyNet* net, int episodes, std::uint64_t seed,
                       int max_steps_per_episode = 100000);

}  // namespace reader::rl
