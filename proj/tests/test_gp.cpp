#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "roska/roska.hpp"

using namespace roska;

namespace {

// Independent oracle: GP posterior via naive Gaussian elimination with
// partial pivoting; no shared code with the implementation path.
struct OraclePosterior {
    double mean, variance;
};

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

OraclePosterior oracle_posterior(const std::vector<std::pair<double, double>>& data,
                                 const bo::GpKernel& k, double query) {
    auto kern = [&](double x, double y) {
        const double d = (x - y) / k.length_scale;
        return k.signal_var * std::exp(-0.5 * d * d);
    };
    const std::size_t n = data.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    std::vector<double> y(n), ks(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = data[i].second;
        ks[i] = kern(query, data[i].first);
        for (std::size_t j = 0; j < n; ++j) K[i][j] = kern(data[i].first, data[j].first);
        K[i][i] += k.noise_var;
    }
    const auto w = solve_dense(K, y);
    const auto u = solve_dense(K, ks);
    OraclePosterior out{0.0, kern(query, query)};
    for (std::size_t i = 0; i < n; ++i) {
        out.mean += ks[i] * w[i];
        out.variance -= ks[i] * u[i];
    }
    out.variance = std::max(out.variance, 0.0);
    return out;
}

}  // namespace

TEST(Gp, NoiseFreeSinglePointInterpolation) {
    bo::GpState gp({1.0, 0.2, 0.0});
    gp.add(0.5, 2.0);
    const auto post = gp.posterior(0.5);
    EXPECT_NEAR(post.mean, 2.0, 1e-9);
    EXPECT_NEAR(post.variance, 0.0, 1e-9);
}

TEST(Gp, SymmetricDataSymmetricPosterior) {
    bo::GpState gp({2.0, 0.25, 0.0});
    gp.add(0.2, 1.0);
    gp.add(0.8, 1.0);
    gp.add(0.5, 3.0);
    for (double d : {0.05, 0.1, 0.2, 0.3}) {
        EXPECT_NEAR(gp.posterior(0.5 - d).mean, gp.posterior(0.5 + d).mean, 1e-9);
        EXPECT_NEAR(gp.posterior(0.5 - d).variance, gp.posterior(0.5 + d).variance, 1e-9);
    }
}

TEST(Gp, MatchesDenseSolveOracle) {
    RngStream rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        bo::GpKernel kernel{rng.uniform(0.5, 3.0), rng.uniform(0.1, 0.5),
                            rng.uniform(1e-6, 1e-2)};
        bo::GpState gp(kernel);
        std::vector<std::pair<double, double>> data;
        const int n = 5;
        for (int i = 0; i < n; ++i) {
            const double alpha = (i + rng.uniform(0.05, 0.95)) / n;
            const double score = rng.uniform(-3.0, 3.0);
            data.emplace_back(alpha, score);
            gp.add(alpha, score);
        }
        for (double q : {0.07, 0.33, 0.61, 0.94}) {
            const auto post = gp.posterior(q);
            const auto expected = oracle_posterior(data, kernel, q);
            EXPECT_NEAR(post.mean, expected.mean, 1e-8);
            EXPECT_NEAR(post.variance, expected.variance, 1e-8);
        }
    }
}

TEST(Gp, NoiseFreeInterpolatesAllPoints) {
    bo::GpState gp({1.5, 0.2, 0.0});
    const std::vector<std::pair<double, double>> data = {
        {0.0, 1.0}, {0.3, -2.0}, {0.55, 0.7}, {0.8, 4.0}, {1.0, 3.0}};
    for (const auto& [a, s] : data) gp.add(a, s);
    for (const auto& [a, s] : data) {
        const auto post = gp.posterior(a);
        EXPECT_NEAR(post.mean, s, 1e-8);
        EXPECT_NEAR(post.variance, 0.0, 1e-6);
    }
}

TEST(Gp, GuardsAndErrors) {
    bo::GpState empty({1.0, 0.2, 0.0});
    EXPECT_THROW(empty.posterior(0.5), Error);
    bo::GpState gp({1.0, 0.2, 0.0});
    EXPECT_THROW(gp.add(1.5, 0.0), AlphaOutOfRange);
    // Degenerate hyperparameters cannot be rescued by jitter.
    bo::GpState bad({-1.0, 0.2, 0.0});
    bad.add(0.2, 1.0);
    bad.add(0.8, 2.0);
    EXPECT_THROW(bad.posterior(0.5), SingularKernel);
}

TEST(Gp, DuplicatedPointsHandledByJitter) {
    bo::GpState gp({1.0, 0.2, 0.0});
    gp.add(0.5, 2.0);
    gp.add(0.5, 2.0);
    const auto post = gp.posterior(0.5);
    EXPECT_NEAR(post.mean, 2.0, 1e-4);
}

TEST(Ei, ClosedFormEndpoints) {
    EXPECT_DOUBLE_EQ(bo::expected_improvement(1.0, 0.0, 1.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(bo::expected_improvement(2.0, 0.0, 1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(bo::expected_improvement(0.5, 0.0, 1.0, 0.0), 0.0);
    // mu = s_best + xi, sigma = 1 -> EI = phi(0) = 1/sqrt(2 pi)
    EXPECT_NEAR(bo::expected_improvement(1.01, 1.0, 1.0, 0.01), 0.3989422804014327, 1e-9);
}

TEST(Ei, MonteCarloOracle) {
    // E[max(0, X - s_best - xi)], X ~ N(mu, sigma^2)
    const double mu = 1.3, sigma = 0.7, s_best = 1.0, xi = 0.01;
    RngStream rng(101);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = mu + sigma * rng.normal();
        const double v = std::max(0.0, x - s_best - xi);
        sum += v;
        sum_sq += v * v;
    }
    const double mc = sum / n;
    const double se = std::sqrt((sum_sq / n - mc * mc) / n);
    const double ei = bo::expected_improvement(mu, sigma * sigma, s_best, xi);
    EXPECT_NEAR(ei, mc, 4.0 * se);
}

TEST(Ei, NonNegativeEverywhere) {
    bo::GpState gp({1.0, 0.2, 1e-6});
    gp.add(0.1, -1.0);
    gp.add(0.5, 2.0);
    gp.add(0.9, 0.5);
    for (int g = 0; g <= 1000; ++g) {
        const double a = g / 1000.0;
        EXPECT_GE(bo::expected_improvement(gp, a, 2.0, 0.01), 0.0);
    }
}

TEST(Ei, ZeroAtDominatedNoiseFreePoints) {
    bo::GpState gp({1.0, 0.2, 0.0});
    gp.add(0.2, 1.0);
    gp.add(0.8, 3.0);
    // At the observed worse point the posterior is deterministic and below
    // s_best + xi, so EI must be exactly 0.
    EXPECT_DOUBLE_EQ(bo::expected_improvement(gp, 0.2, 3.0, 0.01), 0.0);
}
