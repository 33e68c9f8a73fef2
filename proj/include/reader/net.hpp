#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reader/rng.hpp"

namespace reader::rl {

// Two-hidden-layer tanh MLP with an action-logit head and a scalar value
// head. Parameters live in one flat vector so the optimizer and the
// finite-difference gradient check can treat the network generically.
class PolicyNet {
public:
    PolicyNet() = default;
    PolicyNet(int input_dim, int hidden, int n_actions, Rng& rng);

    struct Activations {
        std::vector<double> input;
        std::vector<double> h1, h2;  // post-tanh
        std::vector<double> logits;
        double value = 0.0;
    };

    Activations forward(const std::vector<double>& input) const;

    // Accumulates d(loss)/d(params) into grad given upstream gradients on the
    // logits and the value output.
    void backward(const Activations& act, const std::vector<double>& dlogits, double dvalue,
                  std::vector<double>& grad) const;

    int input_dim() const { return input_dim_; }
    int hidden() const { return hidden_; }
    int n_actions() const { return n_actions_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

private:
    int input_dim_ = 0, hidden_ = 0, n_actions_ = 0;
    // Layout: W1[h,in] b1[h] W2[h,h] b2[h] Wl[a,h] bl[a] Wv[h] bv
    std::vector<double> params_;

    std::size_t off_w1() const { return 0; }
    std::size_t off_b1() const;
    std::size_t off_w2() const;
    std::size_t off_b2() const;
    std::size_t off_wl() const;
    std::size_t off_bl() const;
    std::size_t off_wv() const;
    std::size_t off_bv() const;
};

// Invalid actions (mask bit clear) get probability exactly 0.
std::vector<double> masked_softmax(const std::vector<double>& logits, std::uint32_t mask);
double masked_log_prob(const std::vector<double>& logits, std::uint32_t mask, int action);
double masked_entropy(const std::vector<double>& logits, std::uint32_t mask);
int sample_masked(const std::vector<double>& logits, std::uint32_t mask, Rng& rng);
int argmax_masked(const std::vector<double>& logits, std::uint32_t mask);

class Adam {
public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}
    void step(std::vector<double>& params, const std::vector<double>& grad);
    double lr() const { return lr_; }

private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::vector<double> m_, v_;
    int t_ = 0;
};

}  // namespace reader::rl
