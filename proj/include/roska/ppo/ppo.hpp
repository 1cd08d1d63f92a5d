#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "roska/dsl/eval.hpp"
#include "roska/env/env.hpp"
#include "roska/policy/net.hpp"
#include "roska/ppo/loss.hpp"

namespace roska::ppo {

/// One named statistics series for the feedback prompt: snapshot means taken
/// every stat_window epochs plus global extrema over per-epoch values.
struct SeriesStats {
    std::string name;
    std::vector<double> snapshots;
    double max = 0.0, mean = 0.0, min = 0.0;
};

/// Result of the policy-improvement operator over p epochs.
struct TrainingRun {
    policy::ParamVector final_params;
    std::vector<std::pair<int, double>> fitness_trace;  // (epoch, mean task fitness)
    std::vector<SeriesStats> component_stats;
    SeriesStats task_score_stats;
    SeriesStats episode_length_stats;
    int epochs_consumed = 0;
    double mts = -std::numeric_limits<double>::infinity();
};

namespace detail {

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

template <typename Scalar>
void adam_update(policy::Net<Scalar>& net, const std::vector<double>& grad, AdamState& adam,
                 const PpoConfig& cfg) {
    ++adam.t;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
    std::size_t i = 0;
    for_each_param(net, [&](Scalar& p) {
        const double g = grad[i];
        adam.m[i] = b1 * adam.m[i] + (1.0 - b1) * g;
        adam.v[i] = b2 * adam.v[i] + (1.0 - b2) * g * g;
        const double mhat = adam.m[i] / bias1;
        const double vhat = adam.v[i] / bias2;
        p = static_cast<Scalar>(static_cast<double>(p) -
                                cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
        ++i;
    });
}

/// Deterministic Fisher-Yates shuffle driven by a counter stream.
inline std::vector<int> shuffled_indices(int n, RngStream rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    return idx;
}

/// Accumulates per-epoch values and exposes snapshot means + global extrema.
class SeriesAccumulator {
public:
    explicit SeriesAccumulator(std::string name) : name_(std::move(name)) {}

    void record_epoch(double value) { epoch_values_.push_back(value); }

    SeriesStats finalize(int window) const {
        SeriesStats s;
        s.name = name_;
        if (epoch_values_.empty()) return s;
        double acc = 0.0;
        s.max = s.min = epoch_values_.front();
        for (double v : epoch_values_) {
            acc += v;
            s.max = std::max(s.max, v);
            s.min = std::min(s.min, v);
        }
        s.mean = acc / static_cast<double>(epoch_values_.size());
        for (std::size_t start = 0; start + static_cast<std::size_t>(window) <= epoch_values_.size();
             start += static_cast<std::size_t>(window)) {
            double sum = 0.0;
            for (int k = 0; k < window; ++k) sum += epoch_values_[start + static_cast<std::size_t>(k)];
            s.snapshots.push_back(sum / window);
        }
        return s;
    }

private:
    std::string name_;
    std::vector<double> epoch_values_;
};

}  // namespace detail

/// Policy improvement operator: PPO with GAE on a vectorized environment under
/// a reward program. Runs exactly p epochs; one epoch is one rollout of
/// rollout_steps x n_envs transitions followed by epochs_per_update minibatch
/// passes. Deterministic for fixed inputs.
inline TrainingRun train(const dsl::RewardProgram& reward, const policy::ParamVector& init,
                         int p, const PpoConfig& cfg, const env::EnvFactory& env_factory,
                         std::uint64_t seed) {
    cfg.validate();
    const env::EnvSpec& spec = env_factory.spec;
    dsl::validate(reward);
    dsl::validate_against_features(reward, spec.feature_names);

    policy::NetArch arch;
    arch.obs_dim = spec.obs_dim;
    arch.action_dim = spec.action_dim;
    policy::check_arch(init, arch);

    TrainingRun run;
    run.epochs_consumed = p;
    if (p <= 0) {
        run.final_params = init;
        return run;
    }

    auto env = env_factory.make(cfg.n_envs, RngStream::derive(seed, {stream::kEnvInit}));
    dsl::CompiledProgram compiled(reward, spec.feature_names);

    using Netf = policy::Net<float>;
    Netf net = Netf::unpack(init, arch);
    detail::AdamState adam(static_cast<std::size_t>(arch.param_count()));

    const int steps = cfg.rollout_steps, envs = cfg.n_envs;
    const int batch_total = steps * envs;
    const int stat_window = cfg.stat_window > 0 ? cfg.stat_window : std::max(1, p / 10);

    std::vector<detail::SeriesAccumulator> component_acc;
    for (std::size_t c = 0; c < compiled.component_count(); ++c)
        component_acc.emplace_back(compiled.component_name(c));
    detail::SeriesAccumulator task_acc("task_score");
    detail::SeriesAccumulator length_acc("episode_lengths");

    Eigen::MatrixXf obs_buf(batch_total, spec.obs_dim);
    Eigen::MatrixXf act_buf(batch_total, spec.action_dim);
    Eigen::VectorXf logp_buf(batch_total);
    Eigen::MatrixXd rewards(steps, envs), values_d(steps, envs);
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> dones(steps, envs);
    std::vector<double> component_values;
    std::vector<double> component_sums(compiled.component_count(), 0.0);

    double last_task_value = 0.0, last_length_value = 0.0;
    std::vector<double> pending_fitness;  // completed episodes since last fitness snapshot
    double last_fitness_snapshot = 0.0;

    const double log2pi = std::log(2.0 * std::numbers::pi);

    for (int epoch = 0; epoch < p; ++epoch) {
        RngStream noise = RngStream::from(seed, {stream::kActionNoise,
                                                 static_cast<std::uint64_t>(epoch)});
        std::fill(component_sums.begin(), component_sums.end(), 0.0);
        std::vector<double> epoch_fitness;
        std::vector<double> epoch_lengths;

        Eigen::MatrixXf obs = env->observations().cast<float>();
        for (int t = 0; t < steps; ++t) {
            Eigen::MatrixXf mean;
            Eigen::VectorXf value;
            net.heads(obs, mean, value);

            Eigen::MatrixXd actions(envs, spec.action_dim);
            for (int i = 0; i < envs; ++i) {
                double logp = -0.5 * spec.action_dim * log2pi;
                for (int d = 0; d < spec.action_dim; ++d) {
                    const double eps = noise.normal();
                    const double sigma = std::exp(static_cast<double>(net.log_std(d)));
                    actions(i, d) = static_cast<double>(mean(i, d)) + sigma * eps;
                    logp += -0.5 * eps * eps - static_cast<double>(net.log_std(d));
                }
                logp_buf(t * envs + i) = static_cast<float>(logp);
            }

            env::StepResult sr = env->step(actions);
            for (int i = 0; i < envs; ++i) {
                const int row = t * envs + i;
                obs_buf.row(row) = obs.row(i);
                act_buf.row(row) = actions.row(i).cast<float>();
                values_d(t, i) = static_cast<double>(value(i));
                rewards(t, i) = compiled.evaluate(
                    std::span<const double>(sr.features.row(i).data(),
                                            static_cast<std::size_t>(sr.features.cols())),
                    component_values);
                for (std::size_t c = 0; c < component_values.size(); ++c)
                    component_sums[c] += component_values[c];
                dones(t, i) = sr.done[static_cast<std::size_t>(i)];
                if (sr.done[static_cast<std::size_t>(i)]) {
                    epoch_fitness.push_back(sr.episode_fitness[static_cast<std::size_t>(i)]);
                    epoch_lengths.push_back(sr.episode_length[static_cast<std::size_t>(i)]);
                    pending_fitness.push_back(sr.episode_fitness[static_cast<std::size_t>(i)]);
                }
            }
            obs = env->observations().cast<float>();
        }

        Eigen::MatrixXf boot_mean;
        Eigen::VectorXf boot_value;
        net.heads(obs, boot_mean, boot_value);

        Eigen::MatrixXd advantages, returns;
        compute_gae(rewards, values_d, dones, boot_value.cast<double>(), cfg.gamma,
                    cfg.gae_lambda, advantages, returns);

        // Advantage normalization per rollout (mean 0, std 1, eps 1e-8).
        const double adv_mean = advantages.mean();
        const double adv_std = std::sqrt(
            (advantages.array() - adv_mean).square().sum() / advantages.size());
        Eigen::VectorXf adv_flat(batch_total), ret_flat(batch_total);
        for (int t = 0; t < steps; ++t)
            for (int i = 0; i < envs; ++i) {
                adv_flat(t * envs + i) = static_cast<float>(
                    (advantages(t, i) - adv_mean) / (adv_std + 1e-8));
                ret_flat(t * envs + i) = static_cast<float>(returns(t, i));
            }

        const int mb_count = std::min(cfg.minibatches, batch_total);
        for (int pass = 0; pass < cfg.epochs_per_update; ++pass) {
            std::vector<int> order = detail::shuffled_indices(
                batch_total,
                RngStream::from(seed, {stream::kShuffle, static_cast<std::uint64_t>(epoch),
                                       static_cast<std::uint64_t>(pass)}));
            for (int mb = 0; mb < mb_count; ++mb) {
                const int begin = batch_total * mb / mb_count;
                const int end = batch_total * (mb + 1) / mb_count;
                const int mb_n = end - begin;
                RolloutBatch<float> batch;
                batch.obs.resize(mb_n, spec.obs_dim);
                batch.actions.resize(mb_n, spec.action_dim);
                batch.old_logp.resize(mb_n);
                batch.advantages.resize(mb_n);
                batch.returns.resize(mb_n);
                for (int k = 0; k < mb_n; ++k) {
                    const int src = order[static_cast<std::size_t>(begin + k)];
                    batch.obs.row(k) = obs_buf.row(src);
                    batch.actions.row(k) = act_buf.row(src);
                    batch.old_logp(k) = logp_buf(src);
                    batch.advantages(k) = adv_flat(src);
                    batch.returns(k) = ret_flat(src);
                }
                policy::Net<float> grad;
                ppo_loss(net, batch, cfg, &grad);
                detail::adam_update(net, detail::flatten(grad), adam, cfg);
            }
        }

        // Feedback statistics: per-epoch means feed the snapshot series.
        for (std::size_t c = 0; c < component_sums.size(); ++c)
            component_acc[c].record_epoch(component_sums[c] / batch_total);
        if (!epoch_fitness.empty()) {
            double s = 0.0;
            for (double f : epoch_fitness) s += f;
            last_task_value = s / static_cast<double>(epoch_fitness.size());
        }
        task_acc.record_epoch(last_task_value);
        if (!epoch_lengths.empty()) {
            double s = 0.0;
            for (double l : epoch_lengths) s += l;
            last_length_value = s / static_cast<double>(epoch_lengths.size());
        }
        length_acc.record_epoch(last_length_value);

        const bool snapshot_due = (epoch + 1) % cfg.eval_every == 0 || epoch + 1 == p;
        if (snapshot_due) {
            if (!pending_fitness.empty()) {
                double s = 0.0;
                for (double f : pending_fitness) s += f;
                last_fitness_snapshot = s / static_cast<double>(pending_fitness.size());
                pending_fitness.clear();
            }
            if (run.fitness_trace.empty() || run.fitness_trace.back().first != epoch + 1)
                run.fitness_trace.emplace_back(epoch + 1, last_fitness_snapshot);
        }
    }

    run.final_params = net.pack(arch);
    for (const auto& acc : component_acc) run.component_stats.push_back(acc.finalize(stat_window));
    run.task_score_stats = task_acc.finalize(stat_window);
    run.episode_length_stats = length_acc.finalize(stat_window);
    for (const auto& [epoch, fitness] : run.fitness_trace) run.mts = std::max(run.mts, fitness);
    return run;
}

/// Mean ground-truth task fitness of `episodes` deterministic (mean-action)
/// rollouts from fresh initial states.
inline double evaluate_return(const policy::ParamVector& params,
                              const env::EnvFactory& env_factory, int episodes,
                              std::uint64_t seed) {
    if (episodes < 1) throw Error("evaluate_return requires episodes >= 1");
    const env::EnvSpec& spec = env_factory.spec;
    policy::NetArch arch;
    arch.obs_dim = spec.obs_dim;
    arch.action_dim = spec.action_dim;
    policy::check_arch(params, arch);

    auto env = env_factory.make(episodes, RngStream::derive(seed, {stream::kEval}));
    const policy::Net<double> net = policy::Net<double>::unpack(params, arch);

    std::vector<std::uint8_t> finished(static_cast<std::size_t>(episodes), 0);
    std::vector<double> fitness(static_cast<std::size_t>(episodes), 0.0);
    int remaining = episodes;
    const int max_steps = 2 * spec.episode_length + 1;
    for (int t = 0; t < max_steps && remaining > 0; ++t) {
        Eigen::MatrixXd mean;
        Eigen::VectorXd value;
        net.heads(env->observations(), mean, value);
        env::StepResult sr = env->step(mean);
        for (int i = 0; i < episodes; ++i) {
            if (!finished[static_cast<std::size_t>(i)] && sr.done[static_cast<std::size_t>(i)]) {
                finished[static_cast<std::size_t>(i)] = 1;
                fitness[static_cast<std::size_t>(i)] =
                    sr.episode_fitness[static_cast<std::size_t>(i)];
                --remaining;
            }
        }
    }
    double total = 0.0;
    for (double f : fitness) total += f;
    return total / static_cast<double>(episodes);
}

}  // namespace roska::ppo
