#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "roska/common/errors.hpp"
#include "roska/dsl/print.hpp"
#include "roska/env/env.hpp"
#include "roska/ppo/ppo.hpp"

namespace roska::llm {

/// Statistics block of the feedback prompt: per-component snapshot series plus
/// task score and episode lengths, each with global max/mean/min.
struct FeedbackStats {
    std::vector<ppo::SeriesStats> components;
    ppo::SeriesStats task_score;
    ppo::SeriesStats episode_lengths;
    int snapshot_window = 0;  // epochs between snapshots

    static FeedbackStats from_run(const ppo::TrainingRun& run, int window) {
        FeedbackStats s;
        s.components = run.component_stats;
        s.task_score = run.task_score_stats;
        s.episode_lengths = run.episode_length_stats;
        s.snapshot_window = window;
        return s;
    }
};

/// Everything the prompt builders need. The feedback prompt requires both
/// best_program and best_stats; the initial prompt requires neither.
struct PromptContext {
    std::string task_description;
    std::vector<std::string> feature_names;
    std::string env_interface;
    std::optional<dsl::RewardProgram> best_program;
    std::optional<FeedbackStats> best_stats;

    static PromptContext initial(const env::EnvSpec& spec) {
        PromptContext ctx;
        ctx.task_description = spec.task_description;
        ctx.feature_names = spec.feature_names;
        ctx.env_interface = make_env_interface(spec);
        return ctx;
    }

    static PromptContext feedback(const env::EnvSpec& spec, const dsl::RewardProgram& best,
                                  const FeedbackStats& stats) {
        PromptContext ctx = initial(spec);
        ctx.best_program = best;
        ctx.best_stats = stats;
        return ctx;
    }

    /// Generated listing of the environment interface: feature names with
    /// semantics plus the reward-program grammar.
    static std::string make_env_interface(const env::EnvSpec& spec) {
        std::string out;
        out += "Environment: " + spec.name + "\n";
        out += "Observation dim: " + std::to_string(spec.obs_dim) +
               ", action dim: " + std::to_string(spec.action_dim) +
               ", episode length: " + std::to_string(spec.episode_length) + "\n";
        out += "Features available to the reward expression:\n";
        for (std::size_t i = 0; i < spec.feature_names.size(); ++i) {
            out += "  - " + spec.feature_names[i];
            if (i < spec.feature_docs.size() && !spec.feature_docs[i].empty())
                out += ": " + spec.feature_docs[i];
            out += "\n";
        }
        out +=
            "\nReward programs use this grammar:\n"
            "  program   := component+\n"
            "  component := \"component\" NAME \"{\" \"temp\" \"=\" NUMBER \"expr\" \"=\" EXPR"
            " \"weight\" \"=\" NUMBER [\"transform\" \"=\" ID] \"}\"\n"
            "  EXPR      := infix arithmetic over features and numbers with + - * /, and the\n"
            "               functions abs(x), exp(x), tanh(x), sqrt(x), min(a, b), max(a, b),\n"
            "               norm(a, ...), clamp(x, lo, hi)\n"
            "Transforms: exp_neg_over_temp (the default; maps the expression value v to\n"
            "exp(-v / temp)) or identity.\n";
        return out;
    }
};

namespace detail {

inline std::string two_decimals(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string series_line(const ppo::SeriesStats& s) {
    std::string out = s.name + ": [";
    for (std::size_t i = 0; i < s.snapshots.size(); ++i) {
        if (i) out += ", ";
        out += "'" + two_decimals(s.snapshots[i]) + "'";
    }
    out += "], Max: " + two_decimals(s.max) + ", Mean: " + two_decimals(s.mean) +
           ", Min: " + two_decimals(s.min);
    return out;
}

inline std::string role_preamble() {
    return "You are a reward engineer trying to write reward functions to solve reinforcement "
           "learning tasks as effectively as possible. Your goal is to write a reward function "
           "for the environment that will help the agent learn the task described in text.\n";
}

inline std::string output_contract() {
    return "Write one reward program in the reward DSL described above. The evaluator computes "
           "two items from it:\n"
           "1. the total reward: the weighted sum of the transformed component values,\n"
           "2. a dictionary of each individual reward component.\n"
           "The program output should be formatted as a code string: \"```reward ... ```\".\n";
}

inline std::string writing_tips() {
    return "Some helpful tips for writing the reward program:\n"
           "(1) You may find it helpful to normalize the reward to a fixed range by applying "
           "transformations like the exp_neg_over_temp transform to the overall reward or its "
           "components.\n"
           "(2) If you choose to transform a reward component, then you must also introduce a "
           "temperature parameter inside the transformation; the temp field of the component is "
           "that parameter, and each transformed reward component should have its own "
           "temperature.\n"
           "(3) Weights may be any real number; use negative weights for penalty components.\n"
           "(4) Most importantly, the reward expression may read only the environment features "
           "listed above. Under no circumstance can you introduce new input variables.\n";
}

}  // namespace detail

/// Zero-shot prompt: role preamble, task, environment interface, output
/// contract, writing tips. A pure function of the context.
inline std::string build_initial_prompt(const PromptContext& ctx) {
    std::string out = detail::role_preamble();
    out += "\nTask description: " + ctx.task_description + "\n\n";
    out += ctx.env_interface;
    out += "\n";
    out += detail::output_contract();
    out += "\n";
    out += detail::writing_tips();
    return out;
}

/// Improvement prompt: the best program so far, its tracked statistics, the
/// analysis tips, then the same output contract as the initial prompt.
inline std::string build_feedback_prompt(const PromptContext& ctx) {
    if (!ctx.best_program || !ctx.best_stats)
        throw MissingFeedback("feedback prompt requires best_program and best_stats");
    const FeedbackStats& stats = *ctx.best_stats;

    std::string out = detail::role_preamble();
    out += "\nTask description: " + ctx.task_description + "\n\n";
    out += ctx.env_interface;
    out += "\nBest-performed reward program so far:\n```reward\n";
    out += dsl::print(*ctx.best_program);
    out += "```\n";
    out += "\nMeasurement of the best-performed policy:\n";
    out += "We trained a RL policy using the provided reward program and tracked the values of "
           "the individual components in the reward function as well as global policy metrics "
           "such as task scores and episode lengths after every " +
           std::to_string(stats.snapshot_window) +
           " epochs and the maximum, mean, minimum values encountered:\n\n";
    for (const auto& c : stats.components) out += detail::series_line(c) + "\n";
    out += detail::series_line(stats.task_score) + "\n";
    out += detail::series_line(stats.episode_lengths) + "\n";
    out += "\nPlease carefully analyze the policy feedback and provide a new, improved reward "
           "program that can better solve the task. Some helpful tips for analyzing the policy "
           "feedback:\n"
           "(1) If the success rates are always near zero, then you must rewrite the entire "
           "reward program.\n"
           "(2) If the values for a certain reward component are near identical throughout, "
           "then this means RL is not able to optimize this component as it is written. You may "
           "consider: (a) changing its scale or the value of its temperature parameter, (b) "
           "re-writing the reward component, or (c) discarding the reward component.\n"
           "(3) If some reward components' magnitude is significantly larger, then you must "
           "re-scale its value to a proper range.\n\n";
    out += detail::output_contract();
    out += "\n";
    out += detail::writing_tips();
    return out;
}

}  // namespace roska::llm
