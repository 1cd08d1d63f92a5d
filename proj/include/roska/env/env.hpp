#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "roska/common/errors.hpp"
#include "roska/common/rng.hpp"

#include "nlohmann/json.hpp"

namespace roska::env {

/// Static description of an environment; `task_description` is the text fed
/// to the generator prompts.
struct EnvSpec {
    std::string name;
    std::vector<std::string> feature_names;
    std::vector<std::string> feature_docs;  // optional, parallel to feature_names
    int obs_dim = 0;
    int action_dim = 0;
    int episode_length = 1;
    double dt = 0.05;
    std::string task_description;

    int feature_index(const std::string& feature) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == feature) return static_cast<int>(i);
        throw MissingFeature(feature);
    }
};

/// Feature rows are stored row-major so each env's row is a contiguous span.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Transition output for every env in the batch. `features` rows align with
/// EnvSpec::feature_names and describe the transition that just happened;
/// observations() reflects the post-step (possibly auto-reset) state.
struct StepResult {
    FeatureMatrix features;                // n_envs x n_features
    std::vector<std::uint8_t> done;        // episode ended on this step
    std::vector<double> episode_fitness;   // valid where done[i] != 0
    std::vector<int> episode_length;       // valid where done[i] != 0
};

/// Recorded feature rows of one completed episode; input to task_fitness.
struct EpisodeTrace {
    std::vector<std::string> feature_names;
    FeatureMatrix steps;  // n_steps x n_features

    double feature(int step, const std::string& name) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == name) return steps(step, static_cast<long>(i));
        throw MissingFeature(name);
    }
};

/// Vectorized environment batch. Single-owner mutable state: one batch per
/// thread; separate batches never share anything.
class EnvBatch {
public:
    virtual ~EnvBatch() = default;

    const EnvSpec& spec() const { return spec_; }
    int n_envs() const { return n_envs_; }

    /// Policy observations for the current state, n_envs x obs_dim.
    virtual Eigen::MatrixXd observations() const = 0;

    /// Advances every env by one step. Actions are clamped to [-1, 1] per
    /// dimension (never rejected). Finished envs auto-reset from a fresh
    /// per-env seed stream after their fitness is reported.
    StepResult step(const Eigen::MatrixXd& actions) {
        StepResult result;
        const long n_features = static_cast<long>(spec_.feature_names.size());
        result.features.resize(n_envs_, n_features);
        result.done.assign(static_cast<std::size_t>(n_envs_), 0);
        result.episode_fitness.assign(static_cast<std::size_t>(n_envs_), 0.0);
        result.episode_length.assign(static_cast<std::size_t>(n_envs_), 0);

        for (int i = 0; i < n_envs_; ++i) {
            Eigen::VectorXd a = actions.row(i).transpose().cwiseMax(-1.0).cwiseMin(1.0);
            advance(i, a, result.features.row(i));
            ++step_count_[static_cast<std::size_t>(i)];
            const bool done = step_count_[static_cast<std::size_t>(i)] >= spec_.episode_length ||
                              terminated(i);
            if (done) {
                result.done[static_cast<std::size_t>(i)] = 1;
                result.episode_fitness[static_cast<std::size_t>(i)] = episode_fitness(i);
                result.episode_length[static_cast<std::size_t>(i)] =
                    step_count_[static_cast<std::size_t>(i)];
                reset_env(i);
            }
        }
        return result;
    }

    void reset_all() {
        for (int i = 0; i < n_envs_; ++i) reset_env(i);
    }

protected:
    EnvBatch(EnvSpec spec, int n_envs, std::uint64_t seed)
        : spec_(std::move(spec)),
          n_envs_(n_envs),
          seed_(seed),
          step_count_(static_cast<std::size_t>(n_envs), 0),
          reset_count_(static_cast<std::size_t>(n_envs), 0) {}

    /// Fills per-env state from the env's init distribution.
    virtual void init_state(int env_index, RngStream& rng) = 0;
    /// One dynamics step; writes this transition's feature row and updates
    /// the env's internal fitness accumulators.
    virtual void advance(int env_index, const Eigen::VectorXd& action,
                         Eigen::Ref<Eigen::RowVectorXd> features) = 0;
    /// Task-specific early termination; defaults to none.
    virtual bool terminated(int) const { return false; }
    /// Fitness of the episode that just finished for this env.
    virtual double episode_fitness(int env_index) const = 0;

    void reset_env(int i) {
        RngStream rng = RngStream::from(
            seed_, {stream::kEnvInit, static_cast<std::uint64_t>(i),
                    reset_count_[static_cast<std::size_t>(i)]});
        ++reset_count_[static_cast<std::size_t>(i)];
        step_count_[static_cast<std::size_t>(i)] = 0;
        init_state(i, rng);
    }

    EnvSpec spec_;
    int n_envs_;
    std::uint64_t seed_;
    std::vector<int> step_count_;
    std::vector<std::uint64_t> reset_count_;
};

/// Factory handle: an EnvSpec plus a constructor, so trainers can own fresh
/// batches without knowing the concrete env type.
struct EnvFactory {
    EnvSpec spec;
    std::function<std::unique_ptr<EnvBatch>(int n_envs, std::uint64_t seed)> make;
};

namespace detail {
using FactoryBuilder = std::function<EnvFactory(const nlohmann::json& overrides)>;

inline std::map<std::string, FactoryBuilder>& registry() {
    static std::map<std::string, FactoryBuilder> map;
    return map;
}
}  // namespace detail

inline void register_env(const std::string& name, detail::FactoryBuilder builder) {
    detail::registry()[name] = std::move(builder);
}

void register_builtin_envs();  // defined in desk_envs.hpp

inline EnvFactory env_factory(const std::string& name, const nlohmann::json& overrides = {}) {
    register_builtin_envs();
    auto it = detail::registry().find(name);
    if (it == detail::registry().end()) throw UnknownEnv(name);
    return it->second(overrides);
}

inline std::unique_ptr<EnvBatch> make_env(const std::string& name, int n_envs,
                                          std::uint64_t seed,
                                          const nlohmann::json& overrides = {}) {
    return env_factory(name, overrides).make(n_envs, seed);
}

}  // namespace roska::env

#include "roska/env/desk_envs.hpp"
