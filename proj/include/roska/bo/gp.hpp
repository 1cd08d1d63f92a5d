#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "roska/common/errors.hpp"

namespace roska::bo {

struct GpKernel {
    double signal_var = 1.0;   // sigma_f^2
    double length_scale = 0.2; // ell
    double noise_var = 0.0;    // sigma_n^2
};

/// Gaussian-process regression state over the fusion ratio: dataset
/// D = {(alpha_i, s_i)}, RBF kernel, cached Cholesky factorization.
class GpState {
public:
    GpState() = default;
    explicit GpState(GpKernel kernel) : kernel_(kernel) {}

    void add(double alpha, double score) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw AlphaOutOfRange(alpha);
        data_.emplace_back(alpha, score);
        dirty_ = true;
    }

    const std::vector<std::pair<double, double>>& data() const { return data_; }
    const GpKernel& kernel() const { return kernel_; }

    double kernel_value(double a, double b) const {
        const double d = (a - b) / kernel_.length_scale;
        return kernel_.signal_var * std::exp(-0.5 * d * d);
    }

    struct Posterior {
        double mean = 0.0;
        double variance = 0.0;
    };

    /// Standard GP regression posterior at `query`; variance clamped at 0.
    /// Requires at least one data point. Throws SingularKernel if the kernel
    /// matrix cannot be factorized after jitter retries.
    Posterior posterior(double query) const {
        if (data_.empty()) throw Error("gp posterior requires at least one data point");
        refresh();
        const long n = static_cast<long>(data_.size());
        Eigen::VectorXd k_star(n);
        for (long i = 0; i < n; ++i) k_star(i) = kernel_value(query, data_[static_cast<std::size_t>(i)].first);
        Posterior out;
        out.mean = k_star.dot(weights_);
        const Eigen::VectorXd u = llt_.solve(k_star);
        out.variance = std::max(0.0, kernel_value(query, query) - k_star.dot(u));
        return out;
    }

private:
    void refresh() const {
        if (!dirty_) return;
        const long n = static_cast<long>(data_.size());
        Eigen::MatrixXd K(n, n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                K(i, j) = kernel_value(data_[static_cast<std::size_t>(i)].first,
                                       data_[static_cast<std::size_t>(j)].first);
        K.diagonal().array() += kernel_.noise_var;

        // Jitter 1e-9 added up to 3 times on factorization failure.
        double jitter = 0.0;
        for (int attempt = 0; attempt <= 3; ++attempt) {
            Eigen::MatrixXd Kj = K;
            Kj.diagonal().array() += jitter;
            llt_.compute(Kj);
            if (llt_.info() == Eigen::Success) {
                Eigen::VectorXd y(n);
                for (long i = 0; i < n; ++i) y(i) = data_[static_cast<std::size_t>(i)].second;
                weights_ = llt_.solve(y);
                dirty_ = false;
                return;
            }
            jitter += 1e-9;
        }
        throw SingularKernel("kernel matrix not positive definite after jitter retries");
    }

    GpKernel kernel_;
    std::vector<std::pair<double, double>> data_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
    mutable Eigen::VectorXd weights_;
    mutable bool dirty_ = true;
};

inline GpState::Posterior gp_posterior(const GpState& state, double query) {
    return state.posterior(query);
}

}  // namespace roska::bo
