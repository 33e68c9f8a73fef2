#include "reader/net.hpp"

#include <algorithm>
#include <cmath>

#include "reader/errors.hpp"

namespace reader::rl {

std::size_t PolicyNet::off_b1() const { return static_cast<std::size_t>(hidden_) * input_dim_; }
std::size_t PolicyNet::off_w2() const { return off_b1() + hidden_; }
std::size_t PolicyNet::off_b2() const { return off_w2() + static_cast<std::size_t>(hidden_) * hidden_; }
std::size_t PolicyNet::off_wl() const { return off_b2() + hidden_; }
std::size_t PolicyNet::off_bl() const { return off_wl() + static_cast<std::size_t>(n_actions_) * hidden_; }
std::size_t PolicyNet::off_wv() const { return off_bl() + n_actions_; }
std::size_t PolicyNet::off_bv() const { return off_wv() + hidden_; }

PolicyNet::PolicyNet(int input_dim, int hidden, int n_actions, Rng& rng)
    : input_dim_(input_dim), hidden_(hidden), n_actions_(n_actions) {
    params_.assign(off_bv() + 1, 0.0);
    auto init_layer = [&rng, this](std::size_t off, int rows, int cols, double gain) {
        const double scale = gain / std::sqrt(static_cast<double>(cols));
        for (int i = 0; i < rows * cols; ++i)
            params_[off + static_cast<std::size_t>(i)] = rng.uniform(-scale, scale);
    };
    init_layer(off_w1(), hidden_, input_dim_, 1.0);
    init_layer(off_w2(), hidden_, hidden_, 1.0);
    init_layer(off_wl(), n_actions_, hidden_, 0.1);  // near-uniform initial policy
    init_layer(off_wv(), 1, hidden_, 1.0);
}

PolicyNet::Activations PolicyNet::forward(const std::vector<double>& input) const {
    Activations act;
    act.input = input;
    act.h1.assign(static_cast<std::size_t>(hidden_), 0.0);
    act.h2.assign(static_cast<std::size_t>(hidden_), 0.0);
    act.logits.assign(static_cast<std::size_t>(n_actions_), 0.0);
    const double* w1 = params_.data() + off_w1();
    const double* b1 = params_.data() + off_b1();
    for (int i = 0; i < hidden_; ++i) {
        double z = b1[i];
        const double* row = w1 + static_cast<std::size_t>(i) * input_dim_;
        for (int j = 0; j < input_dim_; ++j) z += row[j] * input[static_cast<std::size_t>(j)];
        act.h1[static_cast<std::size_t>(i)] = std::tanh(z);
    }
    const double* w2 = params_.data() + off_w2();
    const double* b2 = params_.data() + off_b2();
    for (int i = 0; i < hidden_; ++i) {
        double z = b2[i];
        const double* row = w2 + static_cast<std::size_t>(i) * hidden_;
        for (int j = 0; j < hidden_; ++j) z += row[j] * act.h1[static_cast<std::size_t>(j)];
        act.h2[static_cast<std::size_t>(i)] = std::tanh(z);
    }
    const double* wl = params_.data() + off_wl();
    const double* bl = params_.data() + off_bl();
    for (int a = 0; a < n_actions_; ++a) {
        double z = bl[a];
        const double* row = wl + static_cast<std::size_t>(a) * hidden_;
        for (int j = 0; j < hidden_; ++j) z += row[j] * act.h2[static_cast<std::size_t>(j)];
        act.logits[static_cast<std::size_t>(a)] = z;
    }
    const double* wv = params_.data() + off_wv();
    double v = params_[off_bv()];
    for (int j = 0; j < hidden_; ++j) v += wv[j] * act.h2[static_cast<std::size_t>(j)];
    act.value = v;
    return act;
}

void PolicyNet::backward(const Activations& act, const std::vector<double>& dlogits, double dvalue,
                         std::vector<double>& grad) const {
    std::vector<double> dh2(static_cast<std::size_t>(hidden_), 0.0);
    // Logit head.
    {
        const double* wl = params_.data() + off_wl();
        double* gwl = grad.data() + off_wl();
        double* gbl = grad.data() + off_bl();
        for (int a = 0; a < n_actions_; ++a) {
            const double d = dlogits[static_cast<std::size_t>(a)];
            if (d == 0.0) continue;
            gbl[a] += d;
            const double* row = wl + static_cast<std::size_t>(a) * hidden_;
            double* grow = gwl + static_cast<std::size_t>(a) * hidden_;
            for (int j = 0; j < hidden_; ++j) {
                grow[j] += d * act.h2[static_cast<std::size_t>(j)];
                dh2[static_cast<std::size_t>(j)] += d * row[j];
            }
        }
    }
    // Value head.
    if (dvalue != 0.0) {
        const double* wv = params_.data() + off_wv();
        double* gwv = grad.data() + off_wv();
        for (int j = 0; j < hidden_; ++j) {
            gwv[j] += dvalue * act.h2[static_cast<std::size_t>(j)];
            dh2[static_cast<std::size_t>(j)] += dvalue * wv[j];
        }
        grad[off_bv()] += dvalue;
    }
    // Hidden layer 2.
    std::vector<double> dh1(static_cast<std::size_t>(hidden_), 0.0);
    {
        const double* w2 = params_.data() + off_w2();
        double* gw2 = grad.data() + off_w2();
        double* gb2 = grad.data() + off_b2();
        for (int i = 0; i < hidden_; ++i) {
            const double h = act.h2[static_cast<std::size_t>(i)];
            const double dz = dh2[static_cast<std::size_t>(i)] * (1.0 - h * h);
            if (dz == 0.0) continue;
            gb2[i] += dz;
            const double* row = w2 + static_cast<std::size_t>(i) * hidden_;
            double* grow = gw2 + static_cast<std::size_t>(i) * hidden_;
            for (int j = 0; j < hidden_; ++j) {
                grow[j] += dz * act.h1[static_cast<std::size_t>(j)];
                dh1[static_cast<std::size_t>(j)] += dz * row[j];
            }
        }
    }
    // Hidden layer 1.
    {
        double* gw1 = grad.data() + off_w1();
        double* gb1 = grad.data() + off_b1();
        for (int i = 0; i < hidden_; ++i) {
            const double h = act.h1[static_cast<std::size_t>(i)];
            const double dz = dh1[static_cast<std::size_t>(i)] * (1.0 - h * h);
            if (dz == 0.0) continue;
            gb1[i] += dz;
            double* grow = gw1 + static_cast<std::size_t>(i) * input_dim_;
            for (int j = 0; j < input_dim_; ++j)
                grow[j] += dz * act.input[static_cast<std::size_t>(j)];
        }
    }
}

std::vector<double> masked_softmax(const std::vector<double>& logits, std::uint32_t mask) {
    std::vector<double> probs(logits.size(), 0.0);
    double max_logit = -1e300;
    for (std::size_t a = 0; a < logits.size(); ++a)
        if ((mask >> a) & 1u) max_logit = std::max(max_logit, logits[a]);
    double total = 0.0;
    for (std::size_t a = 0; a < logits.size(); ++a) {
        if (!((mask >> a) & 1u)) continue;
        probs[a] = std::exp(logits[a] - max_logit);
        total += probs[a];
    }
    for (auto& p : probs) p /= total;
    return probs;
}

double masked_log_prob(const std::vector<double>& logits, std::uint32_t mask, int action) {
    double max_logit = -1e300;
    for (std::size_t a = 0; a < logits.size(); ++a)
        if ((mask >> a) & 1u) max_logit = std::max(max_logit, logits[a]);
    double total = 0.0;
    for (std::size_t a = 0; a < logits.size(); ++a)
        if ((mask >> a) & 1u) total += std::exp(logits[a] - max_logit);
    return logits[static_cast<std::size_t>(action)] - max_logit - std::log(total);
}

double masked_entropy(const std::vector<double>& logits, std::uint32_t mask) {
    const std::vector<double> p = masked_softmax(logits, mask);
    double h = 0.0;
    for (double q : p)
        if (q > 0.0) h -= q * std::log(q);
    return h;
}

int sample_masked(const std::vector<double>& logits, std::uint32_t mask, Rng& rng) {
    const std::vector<double> p = masked_softmax(logits, mask);
    double r = rng.uniform();
    int last_valid = 0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (!((mask >> a) & 1u)) continue;
        last_valid = static_cast<int>(a);
        r -= p[a];
        if (r <= 0.0) return static_cast<int>(a);
    }
    return last_valid;
}

int argmax_masked(const std::vector<double>& logits, std::uint32_t mask) {
    int best = -1;
    double best_logit = -1e300;
    for (std::size_t a = 0; a < logits.size(); ++a) {
        if (!((mask >> a) & 1u)) continue;
        if (logits[a] > best_logit) {
            best_logit = logits[a];
            best = static_cast<int>(a);
        }
    }
    if (best < 0) throw InvalidAction("empty action mask");
    return best;
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
}

}  // namespace reader::rl
