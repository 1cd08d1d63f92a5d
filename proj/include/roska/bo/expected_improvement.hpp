#pragma once

#include <cmath>
#include <numbers>

#include "roska/bo/gp.hpp"

namespace roska::bo {

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Expected improvement for maximization:
///   EI = (mu - s_best - xi) * Phi(z) + sigma * phi(z), z = (mu - s_best - xi) / sigma,
/// degenerating to max(0, mu - s_best - xi) when sigma = 0. Never negative.
inline double expected_improvement(double mean, double variance, double s_best, double xi) {
    const double gap = mean - s_best - xi;
    const double sigma = std::sqrt(std::max(variance, 0.0));
    if (sigma <= 0.0) return std::max(0.0, gap);
    const double z = gap / sigma;
    return std::max(0.0, gap * normal_cdf(z) + sigma * normal_pdf(z));
}

inline double expected_improvement(const GpState& state, double query, double s_best,
                                   double xi) {
    const auto post = state.posterior(query);
    return expected_improvement(post.mean, post.variance, s_best, xi);
}

}  // namespace roska::bo
