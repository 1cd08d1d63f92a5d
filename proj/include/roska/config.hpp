#pragma once

#include <fstream>
#include <set>
#include <string>

#include "roska/bo/sc_bo.hpp"
#include "roska/coevo/schedule.hpp"
#include "roska/common/errors.hpp"
#include "roska/ppo/loss.hpp"

#include "nlohmann/json.hpp"

namespace roska {

struct LlmConfig {
    std::string backend = "mock";  // mock | http
    std::string endpoint_url;
    std::string model_name = "gpt-4o";
    std::string api_key_env_var;
    double temperature = 1.0;
    int max_retries = 2;
    double timeout_s = 30.0;
    bool fallback_to_mock = true;
};

/// One JSON document drives a run: sections env, ppo, bo, schedule, llm plus
/// mode, seed, out_dir.
struct RunConfig {
    std::string env_name = "point-runner";
    nlohmann::json env_overrides = nlohmann::json::object();
    ppo::PpoConfig ppo;
    bo::BoConfig bo;
    coevo::Schedule schedule;
    LlmConfig llm;
    std::string mode = "roska";
    std::uint64_t seed = 0;
    std::string out_dir = "runs";
    int eval_episodes = 8;
    int parallel_candidates = 2;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        return from_json(j);
    }

    nlohmann::ordered_json to_json() const;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const char* section,
                       const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + section);
    }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("bad value for '") + key + "'");
        }
    }
}

}  // namespace detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    detail::check_keys(j, "config",
                       {"env", "ppo", "bo", "schedule", "llm", "mode", "seed", "out_dir",
                        "eval_episodes", "parallel_candidates"});
    if (j.contains("env")) {
        const auto& e = j.at("env");
        if (!e.is_object()) throw ConfigError("env must be a JSON object");
        cfg.env_overrides = e;
        detail::read(e, "name", cfg.env_name);
        cfg.env_overrides.erase("name");
        if (e.contains("n_envs")) {
            cfg.ppo.n_envs = e.at("n_envs").get<int>();
            cfg.env_overrides.erase("n_envs");
        }
    }
    if (j.contains("ppo")) {
        const auto& p = j.at("ppo");
        detail::check_keys(p, "ppo",
                           {"gamma", "gae_lambda", "clip_eps", "lr", "epochs_per_update",
                            "minibatches", "entropy_coef", "value_coef", "rollout_steps",
                            "n_envs", "eval_every", "stat_window"});
        detail::read(p, "gamma", cfg.ppo.gamma);
        detail::read(p, "gae_lambda", cfg.ppo.gae_lambda);
        detail::read(p, "clip_eps", cfg.ppo.clip_eps);
        detail::read(p, "lr", cfg.ppo.lr);
        detail::read(p, "epochs_per_update", cfg.ppo.epochs_per_update);
        detail::read(p, "minibatches", cfg.ppo.minibatches);
        detail::read(p, "entropy_coef", cfg.ppo.entropy_coef);
        detail::read(p, "value_coef", cfg.ppo.value_coef);
        detail::read(p, "rollout_steps", cfg.ppo.rollout_steps);
        detail::read(p, "n_envs", cfg.ppo.n_envs);
        detail::read(p, "eval_every", cfg.ppo.eval_every);
        detail::read(p, "stat_window", cfg.ppo.stat_window);
    }
    if (j.contains("bo")) {
        const auto& b = j.at("bo");
        detail::check_keys(b, "bo",
                           {"initial_alphas", "ei_xi", "grid_size", "length_scale",
                            "noise_ratio"});
        detail::read(b, "initial_alphas", cfg.bo.initial_alphas);
        detail::read(b, "ei_xi", cfg.bo.ei_xi);
        detail::read(b, "grid_size", cfg.bo.grid_size);
        detail::read(b, "length_scale", cfg.bo.length_scale);
        detail::read(b, "noise_ratio", cfg.bo.noise_ratio);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::check_keys(
            s, "schedule",
            {"preset", "n_rounds", "batch_size", "first_round_probe_epochs",
             "first_round_finish_epochs", "bo_J", "bo_T_BO", "post_bo_epochs", "finish_epochs",
             "uniform_alphas_count", "uniform_probe_epochs", "eureka_epochs",
             "dynamic_population", "max_batches_per_dp_round"});
        if (s.contains("preset")) cfg.schedule = coevo::Schedule::preset(s.at("preset"));
        detail::read(s, "n_rounds", cfg.schedule.n_rounds);
        detail::read(s, "batch_size", cfg.schedule.batch_size);
        detail::read(s, "first_round_probe_epochs", cfg.schedule.first_round_probe_epochs);
        detail::read(s, "first_round_finish_epochs", cfg.schedule.first_round_finish_epochs);
        detail::read(s, "bo_J", cfg.schedule.bo_total_evaluations);
        detail::read(s, "bo_T_BO", cfg.schedule.bo_epochs_per_evaluation);
        detail::read(s, "post_bo_epochs", cfg.schedule.post_bo_epochs);
        detail::read(s, "finish_epochs", cfg.schedule.finish_epochs);
        detail::read(s, "uniform_alphas_count", cfg.schedule.uniform_alphas_count);
        detail::read(s, "uniform_probe_epochs", cfg.schedule.uniform_probe_epochs);
        detail::read(s, "eureka_epochs", cfg.schedule.eureka_epochs);
        detail::read(s, "dynamic_population", cfg.schedule.dynamic_population);
        detail::read(s, "max_batches_per_dp_round", cfg.schedule.max_batches_per_dp_round);
    }
    if (j.contains("llm")) {
        const auto& l = j.at("llm");
        detail::check_keys(l, "llm",
                           {"backend", "endpoint_url", "model_name", "api_key_env_var",
                            "temperature", "max_retries", "timeout_s", "fallback_to_mock"});
        detail::read(l, "backend", cfg.llm.backend);
        detail::read(l, "endpoint_url", cfg.llm.endpoint_url);
        detail::read(l, "model_name", cfg.llm.model_name);
        detail::read(l, "api_key_env_var", cfg.llm.api_key_env_var);
        detail::read(l, "temperature", cfg.llm.temperature);
        detail::read(l, "max_retries", cfg.llm.max_retries);
        detail::read(l, "timeout_s", cfg.llm.timeout_s);
        detail::read(l, "fallback_to_mock", cfg.llm.fallback_to_mock);
        if (cfg.llm.backend != "mock" && cfg.llm.backend != "http")
            throw ConfigError("llm.backend must be 'mock' or 'http'");
        if (cfg.llm.backend == "http" && cfg.llm.endpoint_url.empty())
            throw ConfigError("llm.backend http requires endpoint_url");
    }
    detail::read(j, "mode", cfg.mode);
    coevo::ModeSpec::parse(cfg.mode);  // validate early
    detail::read(j, "seed", cfg.seed);
    detail::read(j, "out_dir", cfg.out_dir);
    detail::read(j, "eval_episodes", cfg.eval_episodes);
    detail::read(j, "parallel_candidates", cfg.parallel_candidates);
    try {
        cfg.ppo.validate();
        cfg.bo.validate();
        cfg.schedule.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["env"] = nlohmann::ordered_json(env_overrides);
    j["env"]["name"] = env_name;
    j["env"]["n_envs"] = ppo.n_envs;
    j["ppo"] = {{"gamma", ppo.gamma},
                {"gae_lambda", ppo.gae_lambda},
                {"clip_eps", ppo.clip_eps},
                {"lr", ppo.lr},
                {"epochs_per_update", ppo.epochs_per_update},
                {"minibatches", ppo.minibatches},
                {"entropy_coef", ppo.entropy_coef},
                {"value_coef", ppo.value_coef},
                {"rollout_steps", ppo.rollout_steps},
                {"n_envs", ppo.n_envs},
                {"eval_every", ppo.eval_every},
                {"stat_window", ppo.stat_window}};
    j["bo"] = {{"initial_alphas", bo.initial_alphas},
               {"ei_xi", bo.ei_xi},
               {"grid_size", bo.grid_size},
               {"length_scale", bo.length_scale},
               {"noise_ratio", bo.noise_ratio}};
    j["schedule"] = {{"n_rounds", schedule.n_rounds},
                     {"batch_size", schedule.batch_size},
                     {"first_round_probe_epochs", schedule.first_round_probe_epochs},
                     {"first_round_finish_epochs", schedule.first_round_finish_epochs},
                     {"bo_J", schedule.bo_total_evaluations},
                     {"bo_T_BO", schedule.bo_epochs_per_evaluation},
                     {"post_bo_epochs", schedule.post_bo_epochs},
                     {"finish_epochs", schedule.finish_epochs},
                     {"uniform_alphas_count", schedule.uniform_alphas_count},
                     {"uniform_probe_epochs", schedule.uniform_probe_epochs},
                     {"eureka_epochs", schedule.eureka_epochs},
                     {"dynamic_population", schedule.dynamic_population},
                     {"max_batches_per_dp_round", schedule.max_batches_per_dp_round}};
    j["llm"] = {{"backend", llm.backend},
                {"endpoint_url", llm.endpoint_url},
                {"model_name", llm.model_name},
                {"api_key_env_var", llm.api_key_env_var},
                {"temperature", llm.temperature},
                {"max_retries", llm.max_retries},
                {"timeout_s", llm.timeout_s},
                {"fallback_to_mock", llm.fallback_to_mock}};
    j["mode"] = mode;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["eval_episodes"] = eval_episodes;
    j["parallel_candidates"] = parallel_candidates;
    return j;
}

}  // namespace roska
