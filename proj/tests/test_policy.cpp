#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "helpers.hpp"
#include "roska/roska.hpp"

using namespace roska;

namespace {
policy::NetArch small_arch() {
    policy::NetArch arch;
    arch.obs_dim = 3;
    arch.action_dim = 2;
    arch.hidden = {8, 8};
    return arch;
}
}  // namespace

TEST(PolicyInit, Deterministic) {
    const auto arch = small_arch();
    const auto a = policy::init_params(arch, 42);
    const auto b = policy::init_params(arch, 42);
    EXPECT_EQ(a.values, b.values);
    const auto c = policy::init_params(arch, 43);
    EXPECT_NE(a.values, c.values);
}

TEST(PolicyInit, LogStdZeroAndBiasesZero) {
    const auto arch = small_arch();
    const auto p = policy::init_params(arch, 1);
    const auto net = policy::Net<double>::unpack(p, arch);
    for (int d = 0; d < net.log_std.size(); ++d) EXPECT_DOUBLE_EQ(net.log_std(d), 0.0);
    for (const auto& b : net.policy_b) EXPECT_DOUBLE_EQ(b.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& b : net.value_b) EXPECT_DOUBLE_EQ(b.cwiseAbs().maxCoeff(), 0.0);
    // weights within the per-layer uniform bound
    const double limit0 = std::sqrt(6.0 / (3 + 8));
    EXPECT_LE(net.policy_w[0].cwiseAbs().maxCoeff(), limit0);
}

TEST(PolicyFuse, EndpointsBitExact) {
    const auto arch = small_arch();
    const auto best = policy::init_params(arch, 10);
    const auto theta0 = policy::init_params(arch, 20);
    EXPECT_EQ(policy::fuse(best, theta0, 1.0).values, best.values);
    EXPECT_EQ(policy::fuse(best, theta0, 0.0).values, theta0.values);
}

TEST(PolicyFuse, ElementwiseArithmetic) {
    policy::NetArch arch;
    arch.obs_dim = 1;
    arch.action_dim = 1;
    arch.hidden = {1};
    policy::ParamVector a, b;
    a.arch_hash = b.arch_hash = arch.hash();
    a.values.assign(static_cast<std::size_t>(arch.param_count()), 0.0f);
    b.values = a.values;
    a.values[0] = 1.0f;
    a.values[1] = 2.0f;
    b.values[0] = 0.0f;
    b.values[1] = -1.0f;
    const auto f = policy::fuse(a, b, 0.6);
    EXPECT_FLOAT_EQ(f.values[0], 0.6f);
    EXPECT_FLOAT_EQ(f.values[1], 0.8f);
}

TEST(PolicyFuse, LinearityAndSelfFusion) {
    const auto arch = small_arch();
    RngStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = policy::init_params(arch, rng.next_u64());
        const auto b = policy::init_params(arch, rng.next_u64());
        const double a1 = rng.uniform(), a2 = rng.uniform();
        const auto f1 = policy::fuse(a, b, a1);
        const auto f2 = policy::fuse(a, b, a2);
        const auto fm = policy::fuse(a, b, (a1 + a2) / 2.0);
        for (std::size_t i = 0; i < f1.values.size(); ++i)
            EXPECT_NEAR(f1.values[i] + f2.values[i], 2.0 * fm.values[i], 1e-6);
        const auto self = policy::fuse(a, a, rng.uniform());
        for (std::size_t i = 0; i < self.values.size(); ++i)
            EXPECT_NEAR(self.values[i], a.values[i], 1e-6);
    }
}

TEST(PolicyFuse, Errors) {
    const auto arch = small_arch();
    const auto a = policy::init_params(arch, 1);
    const auto b = policy::init_params(arch, 2);
    EXPECT_THROW(policy::fuse(a, b, -0.1), AlphaOutOfRange);
    EXPECT_THROW(policy::fuse(a, b, 1.1), AlphaOutOfRange);
    policy::NetArch other = arch;
    other.hidden = {4};
    const auto c = policy::init_params(other, 1);
    EXPECT_THROW(policy::fuse(a, c, 0.5), ArchMismatch);
}

TEST(PolicyForward, ZeroParamsGiveZeroOutputs) {
    const auto arch = small_arch();
    policy::ParamVector zero;
    zero.arch_hash = arch.hash();
    zero.values.assign(static_cast<std::size_t>(arch.param_count()), 0.0f);
    const Eigen::VectorXd obs = Eigen::VectorXd::Constant(3, 1.7);
    const auto out = policy::forward(zero, arch, obs);
    EXPECT_EQ(out.action_mean.size(), 2);
    EXPECT_EQ(out.action_log_std.size(), 2);
    EXPECT_DOUBLE_EQ(out.action_mean.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(out.value, 0.0);
}

TEST(PolicyForward, DeterministicAndShaped) {
    const auto arch = small_arch();
    const auto p = policy::init_params(arch, 3);
    Eigen::VectorXd obs(3);
    obs << 0.3, -0.2, 0.9;
    const auto a = policy::forward(p, arch, obs);
    const auto b = policy::forward(p, arch, obs);
    EXPECT_EQ(a.action_mean, b.action_mean);
    EXPECT_EQ(a.value, b.value);
    EXPECT_THROW(policy::forward(p, arch, Eigen::VectorXd::Zero(4)), ArchMismatch);
}

TEST(PolicyCheckpoint, BitExactRoundTrip) {
    const auto arch = small_arch();
    auto p = policy::init_params(arch, 9);
    p.values[3] = 1.5e-7f;  // exercise exact float payload
    const auto dir = std::filesystem::temp_directory_path() / "roska_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "theta.json").string();
    policy::save_checkpoint(path, p, arch, "seed=9");
    const auto loaded = policy::load_checkpoint(path);
    ASSERT_EQ(loaded.params.values.size(), p.values.size());
    EXPECT_EQ(0, std::memcmp(loaded.params.values.data(), p.values.data(),
                             p.values.size() * sizeof(float)));
    EXPECT_EQ(loaded.arch.hash(), arch.hash());
    EXPECT_EQ(loaded.seed_lineage, "seed=9");
    std::filesystem::remove_all(dir);
}

TEST(PolicyCheckpoint, ArchHashGuard) {
    const auto arch = small_arch();
    auto p = policy::init_params(arch, 9);
    policy::NetArch other = arch;
    other.hidden = {4};
    EXPECT_THROW(policy::check_arch(p, other), ArchMismatch);
    p.values.pop_back();
    EXPECT_THROW(policy::check_arch(p, arch), ArchMismatch);
}
