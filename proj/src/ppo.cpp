#include "reader/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reader/errors.hpp"

namespace reader::rl {

double discounted_return(const std::vector<double>& rewards, double gamma) {
    double g = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) g = rewards[t] + gamma * g;
    return g;
}

void compute_gae(std::vector<Transition>& batch, double bootstrap_value, double gamma,
                 double lambda) {
    double next_value = bootstrap_value;
    double next_advantage = 0.0;
    for (std::size_t t = batch.size(); t-- > 0;) {
        Transition& tr = batch[t];
        const double not_done = tr.done ? 0.0 : 1.0;
        const double delta = tr.reward + gamma * next_value * not_done - tr.value;
        tr.advantage = delta + gamma * lambda * not_done * next_advantage;
        tr.value_target = tr.advantage + tr.value;
        next_advantage = tr.advantage;
        next_value = tr.value;
    }
}

double clipped_surrogate_loss(const PolicyNet& net, const std::vector<Transition>& batch,
                              double clip_ratio, std::vector<double>* grad) {
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const Transition& tr : batch) {
        const PolicyNet::Activations act = net.forward(tr.features);
        const double logp = masked_log_prob(act.logits, tr.mask, tr.action);
        const double ratio = std::exp(logp - tr.log_prob);
        const double unclipped = ratio * tr.advantage;
        const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * tr.advantage;
        loss += -std::min(unclipped, clipped) * inv_n;
        if (!grad) continue;
        // The clipped branch is constant in theta; only the unclipped branch
        // propagates gradient, and only when it is the active minimum.
        if (unclipped <= clipped) {
            const double dlogp = -tr.advantage * ratio * inv_n;
            const std::vector<double> probs = masked_softmax(act.logits, tr.mask);
            std::vector<double> dlogits(act.logits.size(), 0.0);
            for (std::size_t a = 0; a < dlogits.size(); ++a) {
                const double indicator = static_cast<int>(a) == tr.action ? 1.0 : 0.0;
                dlogits[a] = dlogp * (indicator - probs[a]);
            }
            net.backward(act, dlogits, 0.0, *grad);
        }
    }
    return loss;
}

double ppo_loss(const PolicyNet& net, const std::vector<Transition>& batch, double clip_ratio,
                double value_coef, double entropy_coef, std::vector<double>* grad) {
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const Transition& tr : batch) {
        const PolicyNet::Activations act = net.forward(tr.features);
        const double logp = masked_log_prob(act.logits, tr.mask, tr.action);
        const double ratio = std::exp(logp - tr.log_prob);
        const double unclipped = ratio * tr.advantage;
        const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * tr.advantage;
        const double verr = act.value - tr.value_target;
        const std::vector<double> probs = masked_softmax(act.logits, tr.mask);
        double entropy = 0.0;
        for (double p : probs)
            if (p > 0.0) entropy -= p * std::log(p);
        loss += (-std::min(unclipped, clipped) + 0.5 * value_coef * verr * verr -
                 entropy_coef * entropy) *
                inv_n;
        if (!grad) continue;
        std::vector<double> dlogits(act.logits.size(), 0.0);
        if (unclipped <= clipped) {
            const double dlogp = -tr.advantage * ratio * inv_n;
            for (std::size_t a = 0; a < dlogits.size(); ++a) {
                const double indicator = static_cast<int>(a) == tr.action ? 1.0 : 0.0;
                dlogits[a] += dlogp * (indicator - probs[a]);
            }
        }
        // d(-c*H)/dlogit_a = c * p_a * (log p_a + H)
        for (std::size_t a = 0; a < dlogits.size(); ++a) {
            if (probs[a] <= 0.0) continue;
            dlogits[a] += entropy_coef * probs[a] * (std::log(probs[a]) + entropy) * inv_n;
        }
        net.backward(act, dlogits, value_coef * verr * inv_n, *grad);
    }
    return loss;
}

namespace {

struct Collector {
    std::vector<Transition> batch;
    std::vector<double> episode_rewards;
    std::vector<double> finished_returns;
    bool episode_open = false;
    std::vector<double> features;
    std::uint32_t mask = 0;
};

}  // namespace

TrainResult train(RlEnv& env, const TrainConfig& cfg) {
    Rng init_rng(Rng::splitmix64(cfg.seed));
    PolicyNet net(env.feature_dim(), cfg.hidden, env.action_count(), init_rng);
    Adam adam(net.param_count(), cfg.learning_rate);
    const double gamma = cfg.effective_gamma();

    TrainResult result;
    PolicyNet last_finite = net;
    Rng env_rng = Rng::derive(cfg.seed, 0xE0F1);
    Collector col;

    for (int update = 0; update < cfg.updates; ++update) {
        col.batch.clear();
        col.finished_returns.clear();
        if (!col.episode_open) {
            col.features = env.reset(env_rng);
            col.mask = env.action_mask();
            col.episode_rewards.clear();
            col.episode_open = true;
        }
        while (static_cast<int>(col.batch.size()) < cfg.rollout_horizon) {
            const PolicyNet::Activations act = net.forward(col.features);
            const int action = sample_masked(act.logits, col.mask, env_rng);
            Transition tr;
            tr.features = col.features;
            tr.mask = col.mask;
            tr.action = action;
            tr.log_prob = masked_log_prob(act.logits, col.mask, action);
            tr.value = act.value;
            RlEnv::Step s = env.step(action, env_rng);
            tr.reward = s.reward;
            tr.done = s.done;
            col.batch.push_back(std::move(tr));
            col.episode_rewards.push_back(s.reward);
            if (s.done) {
                col.finished_returns.push_back(
                    std::accumulate(col.episode_rewards.begin(), col.episode_rewards.end(), 0.0));
                col.features = env.reset(env_rng);
                col.mask = env.action_mask();
                col.episode_rewards.clear();
            } else {
                col.features = s.features;
                col.mask = env.action_mask();
            }
        }
        double bootstrap = 0.0;
        if (!col.batch.back().done) bootstrap = net.forward(col.features).value;
        compute_gae(col.batch, bootstrap, gamma, cfg.gae_lambda);

        // Normalize advantages across the batch.
        double mean = 0.0, sq = 0.0;
        for (const auto& tr : col.batch) mean += tr.advantage;
        mean /= static_cast<double>(col.batch.size());
        for (const auto& tr : col.batch) sq += (tr.advantage - mean) * (tr.advantage - mean);
        const double sd = std::sqrt(sq / static_cast<double>(col.batch.size())) + 1e-8;
        for (auto& tr : col.batch) tr.advantage = (tr.advantage - mean) / sd;

        std::vector<std::size_t> order(col.batch.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> grad(net.param_count(), 0.0);
        std::vector<Transition> minibatch;
        bool diverged = false;
        for (int epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
            // Deterministic shuffle.
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[env_rng.index(i)]);
            for (std::size_t start = 0; start < order.size() && !diverged;
                 start += static_cast<std::size_t>(cfg.minibatch)) {
                const std::size_t end =
                    std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
                minibatch.clear();
                for (std::size_t i = start; i < end; ++i) minibatch.push_back(col.batch[order[i]]);
                std::fill(grad.begin(), grad.end(), 0.0);
                const double loss = ppo_loss(net, minibatch, cfg.clip_ratio, cfg.value_coef,
                                             cfg.entropy_coef, &grad);
                if (!std::isfinite(loss)) {
                    diverged = true;
                    break;
                }
                double norm_sq = 0.0;
                for (double g : grad) norm_sq += g * g;
                const double norm = std::sqrt(norm_sq);
                if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) {
                    const double scale = cfg.max_grad_norm / norm;
                    for (double& g : grad) g *= scale;
                }
                adam.step(net.params(), grad);
            }
        }
        bool finite = !diverged;
        for (double p : net.params())
            if (!std::isfinite(p)) finite = false;
        if (!finite) {
            result.net = last_finite;
            result.updates_run = update;
            throw TrainingDiverged("non-finite loss at update " + std::to_string(update));
        }
        last_finite = net;
        double mean_return = 0.0;
        if (!col.finished_returns.empty())
            mean_return = std::accumulate(col.finished_returns.begin(), col.finished_returns.end(),
                                          0.0) /
                          static_cast<double>(col.finished_returns.size());
        result.return_curve.push_back(mean_return);
        result.updates_run = update + 1;
    }

    result.net = net;
    if (cfg.eval_episodes > 0) {
        result.eval_mean_return = evaluate_policy(env, &result.net, cfg.eval_episodes, cfg.seed + 7919);
        result.random_mean_return = evaluate_policy(env, nullptr, cfg.eval_episodes, cfg.seed + 7919);
        result.beat_baseline =
            result.eval_mean_return > result.random_mean_return + cfg.baseline_margin;
    }
    return result;
}

double evaluate_policy(RlEnv& env, const PolicyNet* net, int episodes, std::uint64_t seed,
                       int max_steps_per_episode) {
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(e));
        std::vector<double> features = env.reset(rng);
        double ep_return = 0.0;
        for (int t = 0; t < max_steps_per_episode; ++t) {
            std::uint32_t mask = env.action_mask();
            int action;
            if (net) {
                const PolicyNet::Activations act = net->forward(features);
                action = sample_masked(act.logits, mask, rng);
            } else {
                // Uniform over valid actions.
                std::vector<int> valid;
                for (int a = 0; a < env.action_count(); ++a)
                    if ((mask >> a) & 1u) valid.push_back(a);
                action = valid[rng.index(valid.size())];
            }
            RlEnv::Step s = env.step(action, rng);
            ep_return += s.reward;
            if (s.done) break;
            features = s.features;
        }
        total += ep_return;
    }
    return total / static_cast<double>(episodes);
}

}  // namespace reader::rl
