#pragma once

#include <algorithm>
#include <cmath>

#include "roska/env/env.hpp"

namespace roska::env {

namespace detail {

inline double json_or(const nlohmann::json& j, const char* key, double fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<double>();
    return fallback;
}

inline int json_or(const nlohmann::json& j, const char* key, int fallback) {
    if (j.is_object() && j.contains(key)) return j.at(key).get<int>();
    return fallback;
}

}  // namespace detail

/// Planar point mass driven by a 2-D force, drag-limited. The task is to move
/// along +x as fast as possible; fitness is the per-step displacement sum,
/// which telescopes to net forward displacement.
class PointRunnerBatch final : public EnvBatch {
public:
    struct Config {
        double drag = 0.1;
        double dt = 0.05;
        int episode_length = 200;
    };

    static EnvSpec make_spec(const Config& cfg) {
        EnvSpec s;
        s.name = "point-runner";
        s.feature_names = {"cur_dist",     "prev_dist", "progress",          "forward_velocity",
                           "lateral_speed", "speed",     "heading_alignment", "action_cost"};
        s.feature_docs = {"x position after the step",
                          "x position before the step",
                          "cur_dist - prev_dist for this step",
                          "velocity along +x",
                          "absolute velocity along y",
                          "velocity magnitude",
                          "forward velocity over speed, 1 when moving straight ahead",
                          "squared norm of the applied action"};
        s.obs_dim = 3;
        s.action_dim = 2;
        s.episode_length = cfg.episode_length;
        s.dt = cfg.dt;
        s.task_description = "Drive the planar point mass to run forward along +x as fast as "
                             "possible. Forces are limited and velocity is drag-limited.";
        return s;
    }

    PointRunnerBatch(const Config& cfg, int n_envs, std::uint64_t seed)
        : EnvBatch(make_spec(cfg), n_envs, seed), cfg_(cfg), state_(n_envs) {
        reset_all();
    }

    Eigen::MatrixXd observations() const override {
        Eigen::MatrixXd obs(n_envs_, 3);
        for (int i = 0; i < n_envs_; ++i) {
            const State& s = state_[static_cast<std::size_t>(i)];
            obs(i, 0) = s.vx;
            obs(i, 1) = s.vy;
            obs(i, 2) = s.y;
        }
        return obs;
    }

private:
    struct State {
        double x = 0, y = 0, vx = 0, vy = 0;
        double start_x = 0;
        double net_progress = 0;
    };

    void init_state(int i, RngStream& rng) override {
        State& s = state_[static_cast<std::size_t>(i)];
        s.x = 0.0;
        s.y = rng.uniform(-0.5, 0.5);
        s.vx = 0.0;
        s.vy = 0.0;
        s.start_x = s.x;
        s.net_progress = 0.0;
    }

    void advance(int i, const Eigen::VectorXd& a,
                 Eigen::Ref<Eigen::RowVectorXd> f) override {
        State& s = state_[static_cast<std::size_t>(i)];
        const double prev_x = s.x;
        s.vx += cfg_.dt * (a(0) - cfg_.drag * s.vx);
        s.vy += cfg_.dt * (a(1) - cfg_.drag * s.vy);
        s.x += cfg_.dt * s.vx;
        s.y += cfg_.dt * s.vy;

        const double progress = s.x - prev_x;
        s.net_progress += progress;
        const double speed = std::sqrt(s.vx * s.vx + s.vy * s.vy);
        f(0) = s.x;
        f(1) = prev_x;
        f(2) = progress;
        f(3) = s.vx;
        f(4) = std::abs(s.vy);
        f(5) = speed;
        f(6) = s.vx / std::max(speed, 1e-6);
        f(7) = a.squaredNorm();
    }

    double episode_fitness(int i) const override {
        return state_[static_cast<std::size_t>(i)].net_progress;
    }

    Config cfg_;
    std::vector<State> state_;
};

/// Rigid body spinning in the plane under torque control toward a target
/// orientation drawn away from the start. Fitness is the longest consecutive
/// run of within-tolerance steps (success = 1[rot_dist < 0.1]).
class RotatorBatch final : public EnvBatch {
public:
    struct Config {
        double inertia = 1.0;
        double torque_limit = 1.0;
        double dt = 0.05;
        int episode_length = 300;
        double success_tolerance = 0.1;
    };

    static EnvSpec make_spec(const Config& cfg) {
        EnvSpec s;
        s.name = "rotator";
        s.feature_names = {"rot_dist", "prev_rot_dist",        "orientation_diff",
                           "orientation_diff_decrease", "angvel", "abs_angvel",
                           "action_cost", "success"};
        s.feature_docs = {"absolute angle error to the target (rad)",
                          "angle error before the step",
                          "alias of rot_dist",
                          "prev_rot_dist - rot_dist, positive when approaching the target",
                          "angular velocity (rad/s)",
                          "absolute angular velocity",
                          "squared norm of the applied torque command",
                          "1 when rot_dist is within the success tolerance"};
        s.obs_dim = 3;
        s.action_dim = 1;
        s.episode_length = cfg.episode_length;
        s.dt = cfg.dt;
        s.task_description = "Spin the planar rigid body to the target orientation using limited "
                             "torque, then hold it within the success tolerance.";
        return s;
    }

    RotatorBatch(const Config& cfg, int n_envs, std::uint64_t seed)
        : EnvBatch(make_spec(cfg), n_envs, seed), cfg_(cfg), state_(n_envs) {
        reset_all();
    }

    Eigen::MatrixXd observations() const override {
        Eigen::MatrixXd obs(n_envs_, 3);
        for (int i = 0; i < n_envs_; ++i) {
            const State& s = state_[static_cast<std::size_t>(i)];
            const double e = angle_error(s);
            obs(i, 0) = std::sin(e);
            obs(i, 1) = std::cos(e);
            obs(i, 2) = s.omega;
        }
        return obs;
    }

private:
    struct State {
        double angle = 0, omega = 0, target = 0;
        double prev_rot_dist = 0;
        int run = 0, best_run = 0;
    };

    static double wrap_pi(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }
    double angle_error(const State& s) const { return wrap_pi(s.angle - s.target); }

    void init_state(int i, RngStream& rng) override {
        State& s = state_[static_cast<std::size_t>(i)];
        s.angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
        // Target disjoint from start: initial rot_dist in [0.8, pi].
        const double offset = rng.uniform(0.8, std::numbers::pi);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        s.target = wrap_pi(s.angle + sign * offset);
        s.omega = 0.0;
        s.prev_rot_dist = std::abs(angle_error(s));
        s.run = 0;
        s.best_run = 0;
    }

    void advance(int i, const Eigen::VectorXd& a,
                 Eigen::Ref<Eigen::RowVectorXd> f) override {
        State& s = state_[static_cast<std::size_t>(i)];
        const double torque = a(0) * cfg_.torque_limit;
        s.omega += cfg_.dt * torque / cfg_.inertia;
        s.angle += cfg_.dt * s.omega;

        const double rot_dist = std::abs(angle_error(s));
        const bool success = rot_dist < cfg_.success_tolerance;
        s.run = success ? s.run + 1 : 0;
        s.best_run = std::max(s.best_run, s.run);

        f(0) = rot_dist;
        f(1) = s.prev_rot_dist;
        f(2) = rot_dist;
        f(3) = s.prev_rot_dist - rot_dist;
        f(4) = s.omega;
        f(5) = std::abs(s.omega);
        f(6) = a.squaredNorm();
        f(7) = success ? 1.0 : 0.0;
        s.prev_rot_dist = rot_dist;
    }

    double episode_fitness(int i) const override {
        return state_[static_cast<std::size_t>(i)].best_run;
    }

    Config cfg_;
    std::vector<State> state_;
};

/// Spring-loaded 1-D drawer. The hand must reach the handle before pull force
/// couples to the drawer. Fitness is the end-of-episode open indicator
/// 1[drawer_pos > 0.39].
class LatchPullerBatch final : public EnvBatch {
public:
    struct Config {
        double spring = 2.0;
        double dt = 0.05;
        int episode_length = 150;
        double open_threshold = 0.39;
        double drawer_limit = 0.5;
        double hand_speed = 2.0;
        double grip_scale = 0.1;
    };

    static EnvSpec make_spec(const Config& cfg) {
        EnvSpec s;
        s.name = "latch-puller";
        s.feature_names = {"drawer_pos", "prev_drawer_pos", "drawer_progress", "drawer_vel",
                           "grip_distance", "grip_closeness", "action_cost", "open_success"};
        s.feature_docs = {"drawer extension after the step",
                          "drawer extension before the step",
                          "drawer_pos - prev_drawer_pos for this step",
                          "drawer velocity",
                          "distance between hand and handle",
                          "pull coupling factor, 1 when gripping the handle",
                          "squared norm of the applied action",
                          "1 when the drawer is past the latch threshold"};
        s.obs_dim = 4;
        s.action_dim = 2;
        s.episode_length = cfg.episode_length;
        s.dt = cfg.dt;
        s.task_description = "Move the hand to the drawer handle and pull the spring-loaded "
                             "drawer open past the latch threshold before the episode ends.";
        return s;
    }

    LatchPullerBatch(const Config& cfg, int n_envs, std::uint64_t seed)
        : EnvBatch(make_spec(cfg), n_envs, seed), cfg_(cfg), state_(n_envs) {
        reset_all();
    }

    Eigen::MatrixXd observations() const override {
        Eigen::MatrixXd obs(n_envs_, 4);
        for (int i = 0; i < n_envs_; ++i) {
            const State& s = state_[static_cast<std::size_t>(i)];
            obs(i, 0) = s.drawer;
            obs(i, 1) = s.drawer_vel;
            obs(i, 2) = s.hand;
            obs(i, 3) = s.hand - s.drawer;
        }
        return obs;
    }

private:
    struct State {
        double drawer = 0, drawer_vel = 0, hand = 0;
    };

    void init_state(int i, RngStream& rng) override {
        State& s = state_[static_cast<std::size_t>(i)];
        s.drawer = 0.0;
        s.drawer_vel = 0.0;
        s.hand = rng.uniform(-1.0, -0.5);
    }

    void advance(int i, const Eigen::VectorXd& a,
                 Eigen::Ref<Eigen::RowVectorXd> f) override {
        State& s = state_[static_cast<std::size_t>(i)];
        const double prev_drawer = s.drawer;

        s.hand += cfg_.dt * cfg_.hand_speed * a(0);
        s.hand = std::clamp(s.hand, -1.0, 1.0);

        const double grip = std::abs(s.hand - s.drawer);
        const double closeness = std::exp(-(grip / cfg_.grip_scale) * (grip / cfg_.grip_scale));
        const double force = a(1) * closeness - cfg_.spring * s.drawer;
        s.drawer_vel += cfg_.dt * force;
        s.drawer += cfg_.dt * s.drawer_vel;
        if (s.drawer < 0.0) {
            s.drawer = 0.0;
            s.drawer_vel = std::max(s.drawer_vel, 0.0);
        } else if (s.drawer > cfg_.drawer_limit) {
            s.drawer = cfg_.drawer_limit;
            s.drawer_vel = std::min(s.drawer_vel, 0.0);
        }

        f(0) = s.drawer;
        f(1) = prev_drawer;
        f(2) = s.drawer - prev_drawer;
        f(3) = s.drawer_vel;
        f(4) = grip;
        f(5) = closeness;
        f(6) = a.squaredNorm();
        f(7) = s.drawer > cfg_.open_threshold ? 1.0 : 0.0;
    }

    double episode_fitness(int i) const override {
        return state_[static_cast<std::size_t>(i)].drawer > cfg_.open_threshold ? 1.0 : 0.0;
    }

    Config cfg_;
    std::vector<State> state_;
};

/// Ground-truth sparse fitness computed from a recorded episode trace.
/// Consistent with the incremental accumulators inside each env.
inline double task_fitness(const std::string& name, const EpisodeTrace& trace) {
    const int n = static_cast<int>(trace.steps.rows());
    if (name == "point-runner") {
        double total = 0.0;
        for (int t = 0; t < n; ++t)
            total += trace.feature(t, "cur_dist") - trace.feature(t, "prev_dist");
        return total;
    }
    if (name == "rotator") {
        int run = 0, best = 0;
        for (int t = 0; t < n; ++t) {
            run = trace.feature(t, "rot_dist") < 0.1 ? run + 1 : 0;
            best = std::max(best, run);
        }
        return best;
    }
    if (name == "latch-puller") {
        if (n == 0) return 0.0;
        return trace.feature(n - 1, "drawer_pos") > 0.39 ? 1.0 : 0.0;
    }
    throw UnknownEnv(name);
}

inline void register_builtin_envs() {
    static const bool once = [] {
        register_env("point-runner", [](const nlohmann::json& o) {
            PointRunnerBatch::Config cfg;
            cfg.drag = detail::json_or(o, "drag", cfg.drag);
            cfg.dt = detail::json_or(o, "dt", cfg.dt);
            cfg.episode_length = detail::json_or(o, "episode_length", cfg.episode_length);
            EnvFactory f;
            f.spec = PointRunnerBatch::make_spec(cfg);
            f.make = [cfg](int n, std::uint64_t seed) {
                return std::make_unique<PointRunnerBatch>(cfg, n, seed);
            };
            return f;
        });
        register_env("rotator", [](const nlohmann::json& o) {
            RotatorBatch::Config cfg;
            cfg.inertia = detail::json_or(o, "inertia", cfg.inertia);
            cfg.torque_limit = detail::json_or(o, "torque_limit", cfg.torque_limit);
            cfg.dt = detail::json_or(o, "dt", cfg.dt);
            cfg.episode_length = detail::json_or(o, "episode_length", cfg.episode_length);
            cfg.success_tolerance = detail::json_or(o, "success_tolerance", cfg.success_tolerance);
            EnvFactory f;
            f.spec = RotatorBatch::make_spec(cfg);
            f.make = [cfg](int n, std::uint64_t seed) {
                return std::make_unique<RotatorBatch>(cfg, n, seed);
            };
            return f;
        });
        register_env("latch-puller", [](const nlohmann::json& o) {
            LatchPullerBatch::Config cfg;
            cfg.spring = detail::json_or(o, "spring", cfg.spring);
            cfg.dt = detail::json_or(o, "dt", cfg.dt);
            cfg.episode_length = detail::json_or(o, "episode_length", cfg.episode_length);
            cfg.open_threshold = detail::json_or(o, "open_threshold", cfg.open_threshold);
            EnvFactory f;
            f.spec = LatchPullerBatch::make_spec(cfg);
            f.make = [cfg](int n, std::uint64_t seed) {
                return std::make_unique<LatchPullerBatch>(cfg, n, seed);
            };
            return f;
        });
        return true;
    }();
    (void)once;
}

}  // namespace roska::env
