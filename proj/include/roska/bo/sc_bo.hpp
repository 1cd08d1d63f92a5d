#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "roska/bo/expected_improvement.hpp"
#include "roska/bo/gp.hpp"
#include "roska/common/rng.hpp"
#include "roska/dsl/ast.hpp"
#include "roska/policy/net.hpp"

namespace roska::bo {

struct BoConfig {
    std::vector<double> initial_alphas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int total_evaluations = 12;     // J
    int epochs_per_evaluation = 200;  // T_BO
    double ei_xi = 0.01;
    int grid_size = 101;
    double length_scale = 0.2;
    double noise_ratio = 1e-4;  // sigma_n^2 as a fraction of sigma_f^2

    void validate() const {
        if (static_cast<int>(initial_alphas.size()) > total_evaluations)
            throw Error("initial_alphas cannot exceed the evaluation budget J");
        if (total_evaluations < 1 || epochs_per_evaluation < 0 || grid_size < 2)
            throw Error("invalid sc-bo configuration");
        for (double a : initial_alphas)
            if (!(a >= 0.0 && a <= 1.0)) throw AlphaOutOfRange(a);
    }
};

/// Outcome of one truncated training at a candidate fusion ratio.
struct BoOutcome {
    double score = 0.0;             // terminal evaluate_return after T_BO epochs
    policy::ParamVector params;     // parameters after T_BO epochs
    double mts = -std::numeric_limits<double>::infinity();
};

/// s(alpha) realized by the trainer: train the fused parameters for `epochs`
/// under `reward`, then score with the ground-truth return.
using BoTrainFn = std::function<BoOutcome(const dsl::RewardProgram& reward,
                                          const policy::ParamVector& fused, int epochs,
                                          std::uint64_t seed_key)>;

struct BoEvaluation {
    int iteration = 0;
    double alpha = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    policy::ParamVector params;  // empty on failure
    double mts = -std::numeric_limits<double>::infinity();
};

struct BoResult {
    double alpha_star = 0.0;
    int best_index = -1;  // index into evaluations
    GpState gp;           // fit over raw (alpha, score) pairs for inspection
    std::vector<BoEvaluation> evaluations;
};

namespace detail {

struct Standardized {
    double shift = 0.0, scale = 1.0;
    GpState gp;
    double s_best = -std::numeric_limits<double>::infinity();
};

/// GP over standardized scores: fixed hyperparameters stay usable across tasks
/// with very different fitness scales.
inline Standardized standardized_gp(const std::vector<std::pair<double, double>>& data,
                                    const BoConfig& cfg) {
    Standardized out;
    double mean = 0.0;
    for (const auto& [a, s] : data) mean += s;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& [a, s] : data) var += (s - mean) * (s - mean);
    var /= static_cast<double>(data.size());
    out.shift = mean;
    out.scale = var > 1e-18 ? std::sqrt(var) : 1.0;

    double std_var = 0.0;
    for (const auto& [a, s] : data) {
        const double z = (s - out.shift) / out.scale;
        std_var += z * z;
    }
    std_var /= static_cast<double>(data.size());
    const double signal_var = std::max(std_var, 1e-6);

    out.gp = GpState({signal_var, cfg.length_scale, cfg.noise_ratio * signal_var});
    for (const auto& [a, s] : data) {
        const double z = (s - out.shift) / out.scale;
        out.gp.add(a, z);
        out.s_best = std::max(out.s_best, z);
    }
    return out;
}

/// Argmax of EI over a uniform grid; ties break to the smallest alpha.
inline double acquire(const std::vector<std::pair<double, double>>& data, const BoConfig& cfg) {
    if (data.empty()) return 0.0;
    const Standardized s = standardized_gp(data, cfg);
    double best_alpha = 0.0;
    double best_ei = -1.0;
    for (int g = 0; g < cfg.grid_size; ++g) {
        const double alpha = static_cast<double>(g) / (cfg.grid_size - 1);
        const double ei = expected_improvement(s.gp, alpha, s.s_best, cfg.ei_xi);
        if (ei > best_ei) {
            best_ei = ei;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

}  // namespace detail

/// Short-cut Bayesian optimization of the fusion ratio. Evaluates s(alpha) at
/// each initial alpha, then at J - len(initial) acquisition-chosen alphas;
/// every evaluation trains exactly T_BO epochs, so the trainer budget per call
/// is J * T_BO. A throwing evaluation is recorded with score -inf and the
/// search continues. Returns the argmax over observed scores.
inline BoResult sc_bo_search(const dsl::RewardProgram& reward,
                             const policy::ParamVector& theta_best,
                             const policy::ParamVector& theta_0, const BoConfig& cfg,
                             const BoTrainFn& train_fn, std::uint64_t seed) {
    cfg.validate();
    BoResult result;
    std::vector<std::pair<double, double>> observed;  // finite scores only

    for (int j = 0; j < cfg.total_evaluations; ++j) {
        double alpha;
        if (j < static_cast<int>(cfg.initial_alphas.size()))
            alpha = cfg.initial_alphas[static_cast<std::size_t>(j)];
        else
            alpha = detail::acquire(observed, cfg);

        BoEvaluation eval;
        eval.iteration = j;
        eval.alpha = alpha;
        const policy::ParamVector fused = policy::fuse(theta_best, theta_0, alpha);
        try {
            BoOutcome out = train_fn(reward, fused, cfg.epochs_per_evaluation,
                                     RngStream::derive(seed, {stream::kBo,
                                                              static_cast<std::uint64_t>(j)}));
            eval.score = out.score;
            eval.params = std::move(out.params);
            eval.mts = out.mts;
        } catch (const std::exception&) {
            // failure recorded as -inf; budget is charged for the scheduled epochs
        }
        if (std::isfinite(eval.score)) observed.emplace_back(alpha, eval.score);
        result.evaluations.push_back(std::move(eval));
    }

    result.best_index = 0;
    for (std::size_t i = 1; i < result.evaluations.size(); ++i)
        if (result.evaluations[i].score > result.evaluations[result.best_index].score)
            result.best_index = static_cast<int>(i);
    result.alpha_star = result.evaluations[static_cast<std::size_t>(result.best_index)].alpha;

    if (!observed.empty()) {
        double mean = 0.0;
        for (const auto& [a, s] : observed) mean += s;
        mean /= static_cast<double>(observed.size());
        double var = 0.0;
        for (const auto& [a, s] : observed) var += (s - mean) * (s - mean);
        var /= static_cast<double>(observed.size());
        const double signal_var = std::max(var, 1e-6);
        result.gp = GpState({signal_var, cfg.length_scale, cfg.noise_ratio * signal_var});
        for (const auto& [a, s] : observed) result.gp.add(a, s);
    }
    return result;
}

}  // namespace roska::bo
