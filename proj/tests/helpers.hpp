#pragma once

// Shared test fixtures: a random reward-program generator for property tests,
// a two-armed bandit environment, and a stub policy optimizer whose "skill"
// is a deterministic function of accumulated training epochs.

#include <memory>
#include <string>
#include <vector>

#include "roska/roska.hpp"

namespace testing_support {

using roska::RngStream;

// ---------------------------------------------------------------------------
// Random reward programs over a feature pool; exercises every node kind.

inline roska::dsl::ExprPtr random_expr(RngStream& rng,
                                       const std::vector<std::string>& features, int depth) {
    using namespace roska::dsl;
    if (depth <= 0 || rng.uniform() < 0.3) {
        if (rng.uniform() < 0.5) {
            double v = rng.uniform(-10.0, 10.0);
            if (rng.uniform() < 0.2) v = std::floor(v);
            return constant(v);
        }
        return feature(features[rng.uniform_int(features.size())]);
    }
    switch (rng.uniform_int(6)) {
        case 0: {
            static const UnaryOp ops[] = {UnaryOp::neg, UnaryOp::abs, UnaryOp::exp,
                                          UnaryOp::tanh, UnaryOp::sqrt};
            return unary(ops[rng.uniform_int(5)], random_expr(rng, features, depth - 1));
        }
        case 1:
        case 2: {
            static const BinaryOp ops[] = {BinaryOp::add, BinaryOp::sub, BinaryOp::mul,
                                           BinaryOp::div, BinaryOp::min, BinaryOp::max};
            return binary(ops[rng.uniform_int(6)], random_expr(rng, features, depth - 1),
                          random_expr(rng, features, depth - 1));
        }
        case 3: {
            std::vector<ExprPtr> children;
            const int n = 1 + static_cast<int>(rng.uniform_int(3));
            for (int i = 0; i < n; ++i)
                children.push_back(random_expr(rng, features, depth - 1));
            return norm(std::move(children));
        }
        case 4: {
            const double lo = rng.uniform(-5.0, 0.0);
            const double hi = rng.uniform(0.0, 5.0);
            return clamp(random_expr(rng, features, depth - 1), lo, hi);
        }
        default:
            return feature(features[rng.uniform_int(features.size())]);
    }
}

inline roska::dsl::RewardProgram random_program(std::uint64_t key,
                                                const std::vector<std::string>& features) {
    RngStream rng(key);
    roska::dsl::RewardProgram p;
    const int n = 1 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < n; ++i) {
        roska::dsl::RewardComponent c;
        c.name = "comp_" + std::to_string(i);
        c.expr = random_expr(rng, features, 3);
        c.temperature = rng.uniform(0.01, 5.0);
        c.transform = rng.uniform() < 0.5 ? roska::dsl::Transform::exp_neg_over_temp
                                          : roska::dsl::Transform::identity;
        c.weight = rng.uniform(-8.0, 8.0);
        p.components.push_back(std::move(c));
    }
    p.source_text = roska::dsl::print(p);
    return p;
}

// ---------------------------------------------------------------------------
// Two-armed bandit: 1-step episodes, payoff 1.0 for action > 0 else 0.2.

class BanditBatch final : public roska::env::EnvBatch {
public:
    static roska::env::EnvSpec make_spec() {
        roska::env::EnvSpec s;
        s.name = "two-armed-bandit";
        s.feature_names = {"payoff", "chosen", "action_cost"};
        s.obs_dim = 1;
        s.action_dim = 1;
        s.episode_length = 1;
        s.dt = 1.0;
        s.task_description = "Pick the better of two arms.";
        return s;
    }

    BanditBatch(int n_envs, std::uint64_t seed)
        : EnvBatch(make_spec(), n_envs, seed), payoff_(n_envs, 0.0) {
        reset_all();
    }

    Eigen::MatrixXd observations() const override {
        return Eigen::MatrixXd::Ones(n_envs_, 1);
    }

private:
    void init_state(int i, RngStream&) override { payoff_[static_cast<std::size_t>(i)] = 0.0; }

    void advance(int i, const Eigen::VectorXd& a,
                 Eigen::Ref<Eigen::RowVectorXd> f) override {
        const bool arm1 = a(0) > 0.0;
        const double payoff = arm1 ? 1.0 : 0.2;
        payoff_[static_cast<std::size_t>(i)] = payoff;
        f(0) = payoff;
        f(1) = arm1 ? 1.0 : 0.0;
        f(2) = a.squaredNorm();
    }

    double episode_fitness(int i) const override {
        return payoff_[static_cast<std::size_t>(i)];
    }

    std::vector<double> payoff_;
};

inline roska::env::EnvFactory bandit_factory() {
    roska::env::EnvFactory f;
    f.spec = BanditBatch::make_spec();
    f.make = [](int n, std::uint64_t seed) { return std::make_unique<BanditBatch>(n, seed); };
    return f;
}

inline roska::dsl::RewardProgram bandit_reward() {
    return roska::dsl::parse(
        "component payoff { temp = 1 expr = payoff weight = 1 transform = identity }");
}

// ---------------------------------------------------------------------------
// Stub optimizer: "skill" lives in values[0]; training adds rate * epochs.
// evaluate() returns values[0], so fusion and the acceptance filter behave
// exactly as the arithmetic predicts.

class StubOptimizer final : public roska::coevo::PolicyOptimizer {
public:
    struct Call {
        double init_skill;
        int epochs;
    };

    explicit StubOptimizer(double rate = 1e-3) : rate_(rate) {
        arch_.obs_dim = 1;
        arch_.action_dim = 1;
        arch_.hidden = {2};
    }

    roska::policy::NetArch arch() const override { return arch_; }

    roska::policy::ParamVector init_params(std::uint64_t key) override {
        return roska::policy::init_params(arch_, key);
    }

    roska::ppo::TrainingRun train(const roska::dsl::RewardProgram&,
                                  const roska::policy::ParamVector& init, int epochs,
                                  std::uint64_t) override {
        calls.push_back({static_cast<double>(init.values[0]), epochs});
        roska::ppo::TrainingRun run;
        run.final_params = init;
        run.final_params.values[0] += static_cast<float>(rate_ * epochs);
        run.epochs_consumed = epochs;
        if (epochs > 0) {
            run.fitness_trace = {{epochs, static_cast<double>(run.final_params.values[0])}};
            run.mts = run.fitness_trace.back().second;
            roska::ppo::SeriesStats s;
            s.name = "stub";
            s.snapshots.assign(10, 0.5);
            s.max = 1.0;
            s.mean = 0.5;
            s.min = 0.0;
            run.component_stats = {s};
            s.name = "task_score";
            run.task_score_stats = s;
            s.name = "episode_lengths";
            run.episode_length_stats = s;
        }
        return run;
    }

    double evaluate(const roska::policy::ParamVector& params, std::uint64_t) override {
        return static_cast<double>(params.values[0]);
    }

    std::vector<Call> calls;

private:
    roska::policy::NetArch arch_;
    double rate_;
};

inline roska::coevo::CoSetup stub_setup(StubOptimizer& opt, const std::string& env_name,
                                        const roska::coevo::Schedule& schedule,
                                        const roska::coevo::ModeSpec& mode, std::uint64_t seed) {
    roska::coevo::CoSetup setup;
    setup.mode = mode;
    setup.schedule = schedule;
    setup.env = roska::env::env_factory(env_name);
    setup.backend = roska::llm::mock_backend_for_env(setup.env.spec, seed);
    setup.optimizer = &opt;
    setup.seed = seed;
    setup.parallel_candidates = 1;
    return setup;
}

}  // namespace testing_support
