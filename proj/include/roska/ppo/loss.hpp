#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "roska/policy/net.hpp"

namespace roska::ppo {

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double lr = 3e-4;
    int epochs_per_update = 4;
    int minibatches = 4;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    int rollout_steps = 64;
    int n_envs = 16;
    int eval_every = 10;       // epochs between fitness snapshots
    int stat_window = 0;       // epochs between feedback-stat snapshots; 0 = p/10
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("gamma must be in (0, 1]");
        if (gae_lambda < 0.0 || gae_lambda > 1.0) throw Error("gae_lambda must be in [0, 1]");
        if (clip_eps <= 0.0 || lr <= 0.0 || epochs_per_update <= 0 || minibatches <= 0 ||
            rollout_steps <= 0 || n_envs <= 0 || eval_every <= 0)
            throw Error("ppo config fields must be positive");
    }
};

/// Fixed transition minibatch the clipped surrogate objective is computed on.
template <typename Scalar>
struct RolloutBatch {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Mat obs;         // N x obs_dim
    Mat actions;     // N x action_dim
    Vec old_logp;    // N
    Vec advantages;  // N
    Vec returns;     // N
};

struct LossBreakdown {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
};

namespace detail {

/// Visits parameters in ParamVector pack order: policy W/b per layer,
/// log-std, value W/b per layer.
template <typename Scalar, typename Fn>
void for_each_param(policy::Net<Scalar>& net, Fn&& fn) {
    auto walk_chain = [&](auto& ws, auto& bs) {
        for (std::size_t l = 0; l < ws.size(); ++l) {
            for (int r = 0; r < ws[l].rows(); ++r)
                for (int c = 0; c < ws[l].cols(); ++c) fn(ws[l](r, c));
            for (int r = 0; r < bs[l].size(); ++r) fn(bs[l](r));
        }
    };
    walk_chain(net.policy_w, net.policy_b);
    for (int i = 0; i < net.log_std.size(); ++i) fn(net.log_std(i));
    walk_chain(net.value_w, net.value_b);
}

template <typename Scalar>
policy::Net<Scalar> zeros_like(const policy::Net<Scalar>& net) {
    policy::Net<Scalar> z;
    for (const auto& w : net.policy_w) z.policy_w.push_back(w * Scalar(0));
    for (const auto& b : net.policy_b) z.policy_b.push_back(b * Scalar(0));
    z.log_std = net.log_std * Scalar(0);
    for (const auto& w : net.value_w) z.value_w.push_back(w * Scalar(0));
    for (const auto& b : net.value_b) z.value_b.push_back(b * Scalar(0));
    return z;
}

template <typename Scalar>
std::vector<double> flatten(const policy::Net<Scalar>& net) {
    std::vector<double> flat;
    for_each_param(const_cast<policy::Net<Scalar>&>(net),
                   [&](Scalar& v) { flat.push_back(static_cast<double>(v)); });
    return flat;
}

/// MLP forward that caches per-layer inputs for the manual backward pass.
template <typename Scalar>
struct ChainCache {
    using Mat = typename policy::Net<Scalar>::Mat;
    std::vector<Mat> inputs;  // inputs[l] feeds layer l; inputs[0] = obs
    Mat output;

    static ChainCache run(const std::vector<Mat>& ws,
                          const std::vector<typename policy::Net<Scalar>::Vec>& bs,
                          const Eigen::Ref<const Mat>& obs) {
        ChainCache cache;
        Mat h = obs;
        for (std::size_t l = 0; l < ws.size(); ++l) {
            cache.inputs.push_back(h);
            Mat z = (h * ws[l].transpose()).rowwise() + bs[l].transpose();
            if (l + 1 < ws.size())
                h = z.array().tanh().matrix();
            else
                h = std::move(z);
        }
        cache.output = std::move(h);
        return cache;
    }

    /// Backpropagates dL/d(output) into weight and bias gradients, given the
    /// cached inputs. tanh derivative uses the cached activated inputs.
    void backward(const std::vector<Mat>& ws, const Mat& grad_output,
                  std::vector<Mat>& grad_w,
                  std::vector<typename policy::Net<Scalar>::Vec>& grad_b) const {
        Mat g = grad_output;
        for (std::size_t li = ws.size(); li-- > 0;) {
            grad_w[li] += g.transpose() * inputs[li];
            grad_b[li] += g.colwise().sum().transpose();
            if (li > 0) {
                Mat upstream = g * ws[li];
                // inputs[li] = tanh(z_{li-1}); d tanh = 1 - tanh^2
                g = (upstream.array() * (Scalar(1) - inputs[li].array().square())).matrix();
            }
        }
    }
};

}  // namespace detail

/// Clipped-surrogate PPO loss over one minibatch:
///   L = -mean(min(r*A, clamp(r, 1∓eps)*A))
///       + value_coef * mean((V - R)^2)
///       - entropy_coef * H(pi)
/// with r = exp(logp - old_logp). When `grad` is non-null it receives dL/dtheta
/// in the same shape as the net. `clipped_ratios`, when provided, collects the
/// clamp outputs (always within [1-eps, 1+eps]).
template <typename Scalar>
LossBreakdown ppo_loss(const policy::Net<Scalar>& net, const RolloutBatch<Scalar>& batch,
                       const PpoConfig& cfg, policy::Net<Scalar>* grad = nullptr,
                       std::vector<double>* clipped_ratios = nullptr) {
    using Mat = typename policy::Net<Scalar>::Mat;
    using Vec = typename policy::Net<Scalar>::Vec;
    const long n = batch.obs.rows();
    const long act_dim = batch.actions.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    auto policy_cache = detail::ChainCache<Scalar>::run(net.policy_w, net.policy_b, batch.obs);
    auto value_cache = detail::ChainCache<Scalar>::run(net.value_w, net.value_b, batch.obs);
    const Mat& mean = policy_cache.output;
    const Vec value = value_cache.output.col(0);

    Vec sigma(act_dim), inv_sigma(act_dim);
    for (long d = 0; d < act_dim; ++d) {
        sigma(d) = static_cast<Scalar>(std::exp(static_cast<double>(net.log_std(d))));
        inv_sigma(d) = Scalar(1) / sigma(d);
    }

    // z = (a - mu) / sigma; logp = sum_d(-0.5 z^2 - log_std) - D/2 log(2pi)
    Mat z = ((batch.actions - mean).array().rowwise() * inv_sigma.transpose().array()).matrix();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    Vec logp(n);
    for (long i = 0; i < n; ++i) {
        double acc = -0.5 * static_cast<double>(act_dim) * log2pi;
        for (long d = 0; d < act_dim; ++d) {
            acc -= 0.5 * static_cast<double>(z(i, d)) * static_cast<double>(z(i, d));
            acc -= static_cast<double>(net.log_std(d));
        }
        logp(i) = static_cast<Scalar>(acc);
    }

    const double lo = 1.0 - cfg.clip_eps, hi = 1.0 + cfg.clip_eps;
    double policy_loss = 0.0, value_loss = 0.0;
    Vec dlogp(n);  // dL/dlogp per sample
    for (long i = 0; i < n; ++i) {
        const double a = static_cast<double>(batch.advantages(i));
        const double r = std::exp(static_cast<double>(logp(i)) -
                                  static_cast<double>(batch.old_logp(i)));
        const double clipped = std::min(std::max(r, lo), hi);
        if (clipped_ratios) clipped_ratios->push_back(clipped);
        const double surr1 = r * a, surr2 = clipped * a;
        policy_loss -= inv_n * std::min(surr1, surr2);
        double g_r;  // d surrogate / d r through the chosen branch
        if (surr1 <= surr2)
            g_r = a;
        else
            g_r = (r > lo && r < hi) ? a : 0.0;
        dlogp(i) = static_cast<Scalar>(-inv_n * g_r * r);

        const double verr = static_cast<double>(value(i)) - static_cast<double>(batch.returns(i));
        value_loss += cfg.value_coef * inv_n * verr * verr;
    }

    double entropy = 0.0;  // diagonal Gaussian, state independent
    for (long d = 0; d < act_dim; ++d)
        entropy += static_cast<double>(net.log_std(d)) + 0.5 * (1.0 + log2pi);

    LossBreakdown out;
    out.policy = policy_loss;
    out.value = value_loss;
    out.entropy = entropy;
    out.total = policy_loss + value_loss - cfg.entropy_coef * entropy;

    if (grad) {
        *grad = detail::zeros_like(net);
        // dlogp/dmu_d = z_d / sigma_d; dlogp/dlog_std_d = z_d^2 - 1.
        Mat grad_mean = ((z.array().rowwise() * inv_sigma.transpose().array()).colwise() *
                         dlogp.array())
                            .matrix();
        policy_cache.backward(net.policy_w, grad_mean, grad->policy_w, grad->policy_b);
        for (long d = 0; d < act_dim; ++d) {
            double g = 0.0;
            for (long i = 0; i < n; ++i)
                g += static_cast<double>(dlogp(i)) *
                     (static_cast<double>(z(i, d)) * static_cast<double>(z(i, d)) - 1.0);
            grad->log_std(d) = static_cast<Scalar>(g - cfg.entropy_coef);
        }
        Mat grad_value(n, 1);
        for (long i = 0; i < n; ++i)
            grad_value(i, 0) = static_cast<Scalar>(
                2.0 * cfg.value_coef * inv_n *
                (static_cast<double>(value(i)) - static_cast<double>(batch.returns(i))));
        value_cache.backward(net.value_w, grad_value, grad->value_w, grad->value_b);
    }
    return out;
}

/// Generalized advantage estimation over a (steps x envs) rollout.
/// Episode ends (done = 1) cut the bootstrap and the recursion.
inline void compute_gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
                        const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& dones,
                        const Eigen::VectorXd& bootstrap_values, double gamma, double lambda,
                        Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns) {
    const long steps = rewards.rows(), envs = rewards.cols();
    advantages.resize(steps, envs);
    returns.resize(steps, envs);
    for (long e = 0; e < envs; ++e) {
        double gae = 0.0;
        for (long t = steps - 1; t >= 0; --t) {
            const double nonterminal = dones(t, e) ? 0.0 : 1.0;
            const double next_value = (t == steps - 1) ? bootstrap_values(e) : values(t + 1, e);
            const double delta =
                rewards(t, e) + gamma * next_value * nonterminal - values(t, e);
            gae = delta + gamma * lambda * nonterminal * gae;
            advantages(t, e) = gae;
            returns(t, e) = gae + values(t, e);
        }
    }
}

}  // namespace roska::ppo
