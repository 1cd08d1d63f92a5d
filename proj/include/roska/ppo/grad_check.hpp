#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "roska/ppo/loss.hpp"

namespace roska::ppo {

/// Synthetic batch for gradient checking. Ratios are kept strictly inside the
/// clip interval so the objective is smooth at the evaluation point and
/// central differences are valid.
inline RolloutBatch<double> make_gradcheck_batch(const policy::NetArch& arch,
                                                 const policy::ParamVector& params, int n,
                                                 std::uint64_t seed) {
    RngStream rng(RngStream::derive(seed, {stream::kEval, 17}));
    const policy::Net<double> net = policy::Net<double>::unpack(params, arch);

    RolloutBatch<double> batch;
    batch.obs.resize(n, arch.obs_dim);
    batch.actions.resize(n, arch.action_dim);
    batch.old_logp.resize(n);
    batch.advantages.resize(n);
    batch.returns.resize(n);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < arch.obs_dim; ++d) batch.obs(i, d) = rng.normal();

    Eigen::MatrixXd mean;
    Eigen::VectorXd value;
    net.heads(batch.obs, mean, value);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    for (int i = 0; i < n; ++i) {
        double logp = -0.5 * arch.action_dim * log2pi;
        for (int d = 0; d < arch.action_dim; ++d) {
            const double eps = rng.normal();
            const double sigma = std::exp(net.log_std(d));
            batch.actions(i, d) = mean(i, d) + sigma * eps;
            logp += -0.5 * eps * eps - net.log_std(d);
        }
        // Ratio exp(offset) stays in [0.86, 1.16], inside the 0.2 clip region.
        batch.old_logp(i) = logp - rng.uniform(-0.15, 0.15);
        batch.advantages(i) = rng.normal();
        batch.returns(i) = rng.normal();
    }
    return batch;
}

/// Max absolute difference between the analytic PPO-loss gradient and central
/// finite differences over `n_coords` randomly chosen coordinates restricted
/// to [coord_begin, coord_end) of the flat parameter layout.
inline double surrogate_grad_check_range(const PpoConfig& cfg,
                                         const policy::ParamVector& params,
                                         const policy::NetArch& arch,
                                         const RolloutBatch<double>& batch, int coord_begin,
                                         int coord_end, int n_coords, double h,
                                         std::uint64_t seed) {
    policy::Net<double> net = policy::Net<double>::unpack(params, arch);
    policy::Net<double> grad;
    ppo_loss(net, batch, cfg, &grad);
    const std::vector<double> flat_grad = detail::flatten(grad);

    auto loss_at = [&](int coord, double delta) {
        policy::Net<double> perturbed = net;
        int i = 0;
        detail::for_each_param(perturbed, [&](double& v) {
            if (i == coord) v += delta;
            ++i;
        });
        return ppo_loss(perturbed, batch, cfg).total;
    };

    RngStream rng(RngStream::derive(seed, {stream::kEval, 23}));
    double max_err = 0.0;
    const int span = coord_end - coord_begin;
    for (int k = 0; k < n_coords; ++k) {
        const int coord = coord_begin + static_cast<int>(rng.uniform_int(
                                            static_cast<std::uint64_t>(span)));
        const double fd = (loss_at(coord, h) - loss_at(coord, -h)) / (2.0 * h);
        max_err = std::max(max_err, std::abs(fd - flat_grad[static_cast<std::size_t>(coord)]));
    }
    return max_err;
}

/// Gradient check over 50 random coordinates of the whole parameter vector,
/// h = 1e-4 central differences.
inline double surrogate_grad_check(const PpoConfig& cfg, const policy::ParamVector& params,
                                   const policy::NetArch& arch,
                                   const RolloutBatch<double>& batch) {
    return surrogate_grad_check_range(cfg, params, arch, batch, 0, arch.param_count(), 50,
                                      1e-4, 12345);
}

}  // namespace roska::ppo
