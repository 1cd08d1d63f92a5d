#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "roska/bo/sc_bo.hpp"
#include "roska/coevo/schedule.hpp"
#include "roska/env/env.hpp"
#include "roska/llm/backend.hpp"
#include "roska/llm/prompt.hpp"
#include "roska/policy/checkpoint.hpp"
#include "roska/ppo/ppo.hpp"
#include "roska/runstore/run_store.hpp"

namespace roska::coevo {

namespace stream_id {
inline constexpr std::uint64_t kTrain = 10;
inline constexpr std::uint64_t kPhaseProbe = 1;
inline constexpr std::uint64_t kPhasePost = 2;
inline constexpr std::uint64_t kPhaseFinish = 3;
inline constexpr std::uint64_t kPhaseUniform = 100;  // + alpha index
}  // namespace stream_id

/// Trainer seam: the orchestrator only needs init/train/evaluate. The PPO
/// implementation is the production path; tests may substitute stubs.
class PolicyOptimizer {
public:
    virtual ~PolicyOptimizer() = default;
    virtual policy::NetArch arch() const = 0;
    virtual policy::ParamVector init_params(std::uint64_t key) = 0;
    virtual ppo::TrainingRun train(const dsl::RewardProgram& reward,
                                   const policy::ParamVector& init, int epochs,
                                   std::uint64_t key) = 0;
    virtual double evaluate(const policy::ParamVector& params, std::uint64_t key) = 0;
};

class PpoPolicyOptimizer final : public PolicyOptimizer {
public:
    PpoPolicyOptimizer(env::EnvFactory env, ppo::PpoConfig cfg, int eval_episodes = 8)
        : env_(std::move(env)), cfg_(cfg), eval_episodes_(eval_episodes) {
        arch_.obs_dim = env_.spec.obs_dim;
        arch_.action_dim = env_.spec.action_dim;
    }

    policy::NetArch arch() const override { return arch_; }

    policy::ParamVector init_params(std::uint64_t key) override {
        return policy::init_params(arch_, key);
    }

    ppo::TrainingRun train(const dsl::RewardProgram& reward, const policy::ParamVector& init,
                           int epochs, std::uint64_t key) override {
        return ppo::train(reward, init, epochs, cfg_, env_, key);
    }

    double evaluate(const policy::ParamVector& params, std::uint64_t key) override {
        return ppo::evaluate_return(params, env_, eval_episodes_, key);
    }

private:
    env::EnvFactory env_;
    ppo::PpoConfig cfg_;
    policy::NetArch arch_;
    int eval_episodes_;
};

/// Best-so-far pair plus accounting. best_program/best_stats feed the next
/// prompt (the lineage); v_best/best_params track the best evaluated policy.
struct CoEvolutionState {
    int round = 0;
    std::optional<dsl::RewardProgram> best_program;
    policy::ParamVector best_params;
    double v_best = -std::numeric_limits<double>::infinity();
    std::optional<llm::FeedbackStats> best_stats;
    double mts = -std::numeric_limits<double>::infinity();  // max training fitness seen
    EpochLedger ledger;
};

struct CoSetup {
    ModeSpec mode;
    Schedule schedule;
    env::EnvFactory env;
    llm::GeneratorBackend backend;
    PolicyOptimizer* optimizer = nullptr;
    bo::BoConfig bo;  // J and T_BO are taken from the schedule
    std::uint64_t seed = 0;
    runstore::EventSink events;
    runstore::RunStore* store = nullptr;
    int parallel_candidates = 2;
};

namespace detail {

inline void emit(const CoSetup& setup, const runstore::Event& e) {
    if (setup.events) setup.events(e);
}

inline std::uint64_t train_key(const CoSetup& s, int round, int batch, int candidate,
                               std::uint64_t phase) {
    return RngStream::derive(s.seed, {stream_id::kTrain, static_cast<std::uint64_t>(round),
                                      static_cast<std::uint64_t>(batch),
                                      static_cast<std::uint64_t>(candidate), phase});
}

/// One evaluation key per experiment so policies from different rounds are
/// scored on identical initial-state draws.
inline std::uint64_t eval_key(const CoSetup& s) {
    return RngStream::derive(s.seed, {stream::kEval});
}

inline int snapshot_window(int epochs) { return std::max(1, epochs / 10); }

inline void run_parallel(int n, int max_threads, const std::function<void(int)>& fn) {
    const int threads = std::max(1, std::min({max_threads, n,
                                              static_cast<int>(std::thread::hardware_concurrency())}));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    for (int w = 0; w < threads; ++w)
        workers.emplace_back([&, w] {
            for (int i = w; i < n; i += threads) fn(i);
        });
    for (auto& t : workers) t.join();
}

struct CandidateOutcome {
    int index = 0;
    dsl::RewardProgram program;
    double alpha = 1.0;
    double score = -std::numeric_limits<double>::infinity();
    double mts = -std::numeric_limits<double>::infinity();
    policy::ParamVector params;     // parameters the next phase continues from
    ppo::TrainingRun last_run;      // most recent training run (for stats)
    bool failed = false;
    std::vector<runstore::Event> events;  // buffered, flushed in index order
};

inline void flush_candidates(const CoSetup& setup, std::vector<CandidateOutcome>& outcomes) {
    for (auto& c : outcomes)
        for (auto& e : c.events) emit(setup, e);
}

inline void buffer_epoch_events(CandidateOutcome& c, const ppo::TrainingRun& run, int round,
                                int batch) {
    for (const auto& [epoch, fitness] : run.fitness_trace) {
        runstore::Event e;
        e["event"] = "epoch";
        e["round"] = round;
        e["candidate"] = c.index;
        e["epoch"] = epoch;
        e["fitness"] = fitness;
        e["batch"] = batch;
        c.events.push_back(std::move(e));
    }
}

inline llm::GenerationResult generate_batch(const CoSetup& setup, const CoEvolutionState& state,
                                            int round, int batch) {
    llm::PromptContext ctx =
        state.best_program
            ? llm::PromptContext::feedback(setup.env.spec, *state.best_program,
                                           state.best_stats.value_or(llm::FeedbackStats{}))
            : llm::PromptContext::initial(setup.env.spec);
    const std::uint64_t batch_key =
        RngStream::derive(setup.seed, {stream::kGenerate, static_cast<std::uint64_t>(round),
                                       static_cast<std::uint64_t>(batch)});
    llm::GenerationResult gen =
        llm::generate_candidates(ctx, setup.schedule.batch_size, setup.backend, batch_key);

    const std::string tag = "round-" + std::to_string(round) + "-batch-" + std::to_string(batch);
    if (setup.store) setup.store->write_text("prompts/" + tag + ".prompt.txt", gen.prompt);
    for (std::size_t k = 0; k < gen.candidates.size(); ++k) {
        const auto& cand = gen.candidates[k];
        if (setup.store) {
            setup.store->write_text(
                "prompts/" + tag + "-candidate-" + std::to_string(k) + ".program.txt",
                dsl::print(cand.program));
            if (!cand.raw_response.empty())
                setup.store->write_text(
                    "prompts/" + tag + "-candidate-" + std::to_string(k) + ".response.txt",
                    cand.raw_response);
        }
        runstore::Event e;
        e["event"] = "candidate_generated";
        e["round"] = round;
        e["batch"] = batch;
        e["candidate"] = k;
        e["origin"] = cand.origin == llm::Candidate::Origin::mock
                          ? "mock"
                          : cand.origin == llm::Candidate::Origin::http ? "http" : "fallback";
        e["program"] = dsl::print(cand.program);
        emit(setup, e);
    }
    return gen;
}

inline void note_candidate_result(const CoSetup& setup, int round, int batch,
                                  const CandidateOutcome& c) {
    runstore::Event e;
    e["event"] = "candidate_result";
    e["round"] = round;
    e["candidate"] = c.index;
    e["score"] = c.score;
    e["mts"] = c.mts;
    e["alpha"] = c.alpha;
    e["batch"] = batch;
    emit(setup, e);
}

inline int best_candidate_index(const std::vector<CandidateOutcome>& outcomes) {
    int best = 0;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
        if (outcomes[i].score > outcomes[static_cast<std::size_t>(best)].score)
            best = static_cast<int>(i);
    return best;
}

/// Shared round tail: train the winning candidate `epochs` more, evaluate,
/// apply the acceptance filter, and update the state on improvement.
inline bool finish_and_filter(const CoSetup& setup, CoEvolutionState& state, int round,
                              int batch, std::vector<CandidateOutcome>& outcomes,
                              int finish_epochs, const std::string& finish_category,
                              bool unconditional_accept) {
    const int best = best_candidate_index(outcomes);
    CandidateOutcome& winner = outcomes[static_cast<std::size_t>(best)];

    double v = -std::numeric_limits<double>::infinity();
    ppo::TrainingRun finish_run;
    if (!winner.failed) {
        if (finish_epochs > 0) {
            finish_run = setup.optimizer->train(
                winner.program, winner.params, finish_epochs,
                train_key(setup, round, batch, winner.index, stream_id::kPhaseFinish));
            state.ledger.charge(finish_category, finish_epochs);
            CandidateOutcome tail;
            tail.index = winner.index;
            buffer_epoch_events(tail, finish_run, round, batch);
            for (auto& e : tail.events) emit(setup, e);
            state.mts = std::max(state.mts, finish_run.mts);
            winner.params = finish_run.final_params;
            winner.last_run = finish_run;
        }
        v = setup.optimizer->evaluate(winner.params, eval_key(setup));
    }

    const bool accepted = unconditional_accept || v > state.v_best;
    if (accepted && !winner.failed) {
        state.best_program = winner.program;
        state.best_params = winner.params;
        state.v_best = v;
        state.best_stats = llm::FeedbackStats::from_run(
            winner.last_run, snapshot_window(winner.last_run.epochs_consumed));
        if (setup.store) {
            policy::save_checkpoint(
                (setup.store->dir() / ("checkpoints/round-" + std::to_string(round) + ".json"))
                    .string(),
                state.best_params, setup.optimizer->arch(),
                "seed=" + std::to_string(setup.seed) + " round=" + std::to_string(round));
        }
    }

    runstore::Event e;
    e["event"] = "round_result";
    e["round"] = round;
    e["batch"] = batch;
    e["accepted"] = accepted && !winner.failed;
    e["candidate"] = winner.index;
    e["score"] = v;
    e["v_best"] = state.v_best;
    e["alpha"] = winner.alpha;
    emit(setup, e);
    return accepted && !winner.failed;
}

}  // namespace detail

/// First round: K zero-shot candidates, each trained from a fresh theta_0 for
/// first_round_probe_epochs; the best by evaluated return trains
/// first_round_finish_epochs more and seeds the incumbent pair.
inline CoEvolutionState run_round_one(const CoSetup& setup, CoEvolutionState state) {
    const Schedule& sched = setup.schedule;
    const int round = 1, batch = 0;
    detail::emit(setup, {{"event", "round_start"}, {"round", round}, {"batch", batch}});
    llm::GenerationResult gen = detail::generate_batch(setup, state, round, batch);

    std::vector<detail::CandidateOutcome> outcomes(
        static_cast<std::size_t>(sched.batch_size));
    detail::run_parallel(sched.batch_size, setup.parallel_candidates, [&](int k) {
        auto& out = outcomes[static_cast<std::size_t>(k)];
        out.index = k;
        out.program = gen.candidates[static_cast<std::size_t>(k)].program;
        try {
            policy::ParamVector theta0 = setup.optimizer->init_params(
                RngStream::derive(setup.seed, {stream::kTheta0, 1, static_cast<std::uint64_t>(k)}));
            ppo::TrainingRun run = setup.optimizer->train(
                out.program, theta0, sched.first_round_probe_epochs,
                detail::train_key(setup, round, batch, k, stream_id::kPhaseProbe));
            detail::buffer_epoch_events(out, run, round, batch);
            out.params = run.final_params;
            out.last_run = run;
            out.mts = run.mts;
            out.score = setup.optimizer->evaluate(run.final_params, detail::eval_key(setup));
        } catch (const std::exception&) {
            out.failed = true;
        }
    });
    state.ledger.charge("round1_probe",
                        static_cast<long long>(sched.batch_size) * sched.first_round_probe_epochs);
    detail::flush_candidates(setup, outcomes);
    for (const auto& c : outcomes) {
        state.mts = std::max(state.mts, c.mts);
        detail::note_candidate_result(setup, round, batch, c);
    }

    detail::finish_and_filter(setup, state, round, batch, outcomes,
                              sched.first_round_finish_epochs, "round1_finish",
                              /*unconditional_accept=*/true);
    state.round = round;
    return state;
}

/// One dynamic-population round: batches of K feedback-conditioned candidates,
/// each evolved by SC-BO (or by the mode's replacement search), with the
/// acceptance filter deciding whether the incumbent pair is replaced. When
/// dynamic population is on, non-improving batches re-generate up to
/// max_batches_per_dp_round times.
inline CoEvolutionState run_dp_round(const CoSetup& setup, CoEvolutionState state) {
    if (!state.best_program) throw Error("dp round requires an incumbent best program");
    const Schedule& sched = setup.schedule;
    const int round = state.round + 1;
    const int max_batches = sched.dynamic_population ? sched.max_batches_per_dp_round : 1;

    bo::BoConfig bo_cfg = setup.bo;
    bo_cfg.total_evaluations = sched.bo_total_evaluations;
    bo_cfg.epochs_per_evaluation = sched.bo_epochs_per_evaluation;

    const policy::ParamVector theta0 = setup.optimizer->init_params(
        RngStream::derive(setup.seed, {stream::kTheta0, static_cast<std::uint64_t>(round)}));

    for (int batch = 0; batch < max_batches; ++batch) {
        detail::emit(setup, {{"event", "round_start"}, {"round", round}, {"batch", batch}});
        llm::GenerationResult gen = detail::generate_batch(setup, state, round, batch);

        std::vector<detail::CandidateOutcome> outcomes(
            static_cast<std::size_t>(sched.batch_size));
        detail::run_parallel(sched.batch_size, setup.parallel_candidates, [&](int k) {
            auto& out = outcomes[static_cast<std::size_t>(k)];
            out.index = k;
            out.program = gen.candidates[static_cast<std::size_t>(k)].program;
            try {
                if (setup.mode.mode == RunMode::fixed_alpha) {
                    // Search collapsed to the fixed ratio; the search budget is
                    // spent as one continuous training run.
                    out.alpha = setup.mode.alpha;
                    const policy::ParamVector fused =
                        policy::fuse(state.best_params, theta0, out.alpha);
                    ppo::TrainingRun probe = setup.optimizer->train(
                        out.program, fused,
                        sched.bo_total_evaluations * sched.bo_epochs_per_evaluation,
                        detail::train_key(setup, round, batch, k, stream_id::kPhaseProbe));
                    detail::buffer_epoch_events(out, probe, round, batch);
                    out.params = probe.final_params;
                    out.last_run = probe;
                    out.mts = probe.mts;
                } else {
                    const std::uint64_t bo_seed = RngStream::derive(
                        setup.seed, {stream::kBo, static_cast<std::uint64_t>(round),
                                     static_cast<std::uint64_t>(batch),
                                     static_cast<std::uint64_t>(k)});
                    bo::BoTrainFn train_fn = [&](const dsl::RewardProgram& reward,
                                                 const policy::ParamVector& fused, int epochs,
                                                 std::uint64_t key) {
                        ppo::TrainingRun run =
                            setup.optimizer->train(reward, fused, epochs, key);
                        bo::BoOutcome o;
                        o.params = run.final_params;
                        o.mts = run.mts;
                        o.score = setup.optimizer->evaluate(o.params, detail::eval_key(setup));
                        return o;
                    };
                    bo::BoResult bo_result = bo::sc_bo_search(
                        out.program, state.best_params, theta0, bo_cfg, train_fn, bo_seed);
                    for (const auto& ev : bo_result.evaluations) {
                        runstore::Event e;
                        e["event"] = "bo_eval";
                        e["candidate"] = k;
                        e["alpha"] = ev.alpha;
                        e["score"] = ev.score;
                        e["iteration"] = ev.iteration;
                        e["round"] = round;
                        e["batch"] = batch;
                        e["mts"] = ev.mts;
                        out.events.push_back(std::move(e));
                        out.mts = std::max(out.mts, ev.mts);
                    }
                    const auto& best_eval =
                        bo_result.evaluations[static_cast<std::size_t>(bo_result.best_index)];
                    if (best_eval.params.values.empty()) {
                        out.failed = true;
                        return;
                    }
                    out.alpha = bo_result.alpha_star;
                    out.params = best_eval.params;
                }
                ppo::TrainingRun post = setup.optimizer->train(
                    out.program, out.params, sched.post_bo_epochs,
                    detail::train_key(setup, round, batch, k, stream_id::kPhasePost));
                detail::buffer_epoch_events(out, post, round, batch);
                out.params = post.final_params;
                out.last_run = post;
                out.mts = std::max(out.mts, post.mts);
                out.score = setup.optimizer->evaluate(out.params, detail::eval_key(setup));
            } catch (const std::exception&) {
                out.failed = true;
            }
        });

        const long long search_epochs =
            static_cast<long long>(sched.bo_total_evaluations) * sched.bo_epochs_per_evaluation;
        state.ledger.charge(setup.mode.mode == RunMode::fixed_alpha ? "fixed_probe" : "bo",
                            static_cast<long long>(sched.batch_size) * search_epochs);
        state.ledger.charge("post_bo",
                            static_cast<long long>(sched.batch_size) * sched.post_bo_epochs);
        detail::flush_candidates(setup, outcomes);
        for (const auto& c : outcomes) {
            state.mts = std::max(state.mts, c.mts);
            detail::note_candidate_result(setup, round, batch, c);
        }

        const bool improved =
            detail::finish_and_filter(setup, state, round, batch, outcomes, sched.finish_epochs,
                                      "finish", /*unconditional_accept=*/false);
        if (improved) break;
        if (batch + 1 == max_batches) {
            detail::emit(setup, {{"event", "no_improvement"},
                                 {"round", round},
                                 {"batches", batch + 1},
                                 {"v_best", state.v_best}});
        }
    }
    state.round = round;
    return state;
}

namespace detail {

/// Eureka-style round: every candidate trains from scratch for eureka_epochs;
/// the round best feeds the next prompt regardless of the incumbent, and the
/// globally best evaluated policy is tracked separately.
inline CoEvolutionState eureka_style_round(const CoSetup& setup, CoEvolutionState state,
                                           int round) {
    const Schedule& sched = setup.schedule;
    const int batch = 0;
    emit(setup, {{"event", "round_start"}, {"round", round}, {"batch", batch}});
    llm::GenerationResult gen = generate_batch(setup, state, round, batch);

    std::vector<CandidateOutcome> outcomes(static_cast<std::size_t>(sched.batch_size));
    run_parallel(sched.batch_size, setup.parallel_candidates, [&](int k) {
        auto& out = outcomes[static_cast<std::size_t>(k)];
        out.index = k;
        out.program = gen.candidates[static_cast<std::size_t>(k)].program;
        out.alpha = 0.0;  // always from scratch
        try {
            policy::ParamVector theta0 = setup.optimizer->init_params(RngStream::derive(
                setup.seed, {stream::kTheta0, static_cast<std::uint64_t>(round),
                             static_cast<std::uint64_t>(k)}));
            ppo::TrainingRun run = setup.optimizer->train(
                out.program, theta0, sched.eureka_epochs,
                train_key(setup, round, batch, k, stream_id::kPhaseProbe));
            buffer_epoch_events(out, run, round, batch);
            out.params = run.final_params;
            out.last_run = run;
            out.mts = run.mts;
            out.score = setup.optimizer->evaluate(out.params, eval_key(setup));
        } catch (const std::exception&) {
            out.failed = true;
        }
    });
    state.ledger.charge("eureka",
                        static_cast<long long>(sched.batch_size) * sched.eureka_epochs);
    flush_candidates(setup, outcomes);
    for (const auto& c : outcomes) {
        state.mts = std::max(state.mts, c.mts);
        note_candidate_result(setup, round, batch, c);
    }

    const int best = best_candidate_index(outcomes);
    const CandidateOutcome& winner = outcomes[static_cast<std::size_t>(best)];
    const bool accepted = !winner.failed && winner.score > state.v_best;
    if (!winner.failed) {
        // Lineage: the round best always feeds the next prompt.
        state.best_program = winner.program;
        state.best_stats = llm::FeedbackStats::from_run(
            winner.last_run, snapshot_window(winner.last_run.epochs_consumed));
        if (accepted) {
            state.v_best = winner.score;
            state.best_params = winner.params;
        }
    }
    runstore::Event e;
    e["event"] = "round_result";
    e["round"] = round;
    e["batch"] = batch;
    e["accepted"] = accepted;
    e["candidate"] = winner.index;
    e["score"] = winner.failed ? -std::numeric_limits<double>::infinity() : winner.score;
    e["v_best"] = state.v_best;
    e["alpha"] = winner.alpha;
    emit(setup, e);
    state.round = round;
    return state;
}

/// Uniform-search round: every candidate probes uniform_alphas_count evenly
/// spaced ratios for uniform_probe_epochs each, then its best fused policy
/// trains finish_epochs; the round winner passes the acceptance filter.
inline CoEvolutionState uniform_dp_round(const CoSetup& setup, CoEvolutionState state) {
    if (!state.best_program) throw Error("dp round requires an incumbent best program");
    const Schedule& sched = setup.schedule;
    const int round = state.round + 1;
    const int max_batches = sched.dynamic_population ? sched.max_batches_per_dp_round : 1;
    const int n_alphas = sched.uniform_alphas_count;

    const policy::ParamVector theta0 = setup.optimizer->init_params(
        RngStream::derive(setup.seed, {stream::kTheta0, static_cast<std::uint64_t>(round)}));

    for (int batch = 0; batch < max_batches; ++batch) {
        emit(setup, {{"event", "round_start"}, {"round", round}, {"batch", batch}});
        llm::GenerationResult gen = generate_batch(setup, state, round, batch);

        std::vector<CandidateOutcome> outcomes(static_cast<std::size_t>(sched.batch_size));
        run_parallel(sched.batch_size, setup.parallel_candidates, [&](int k) {
            auto& out = outcomes[static_cast<std::size_t>(k)];
            out.index = k;
            out.program = gen.candidates[static_cast<std::size_t>(k)].program;
            try {
                double best_score = -std::numeric_limits<double>::infinity();
                ppo::TrainingRun best_run;
                double best_alpha = 0.0;
                for (int u = 0; u < n_alphas; ++u) {
                    const double alpha = static_cast<double>(u) / (n_alphas - 1);
                    const policy::ParamVector fused =
                        policy::fuse(state.best_params, theta0, alpha);
                    ppo::TrainingRun run = setup.optimizer->train(
                        out.program, fused, sched.uniform_probe_epochs,
                        train_key(setup, round, batch, k,
                                  stream_id::kPhaseUniform + static_cast<std::uint64_t>(u)));
                    const double score =
                        setup.optimizer->evaluate(run.final_params, eval_key(setup));
                    out.mts = std::max(out.mts, run.mts);
                    runstore::Event e;
                    e["event"] = "uniform_eval";
                    e["candidate"] = k;
                    e["alpha"] = alpha;
                    e["score"] = score;
                    e["iteration"] = u;
                    e["round"] = round;
                    e["batch"] = batch;
                    out.events.push_back(std::move(e));
                    if (score > best_score) {
                        best_score = score;
                        best_run = run;
                        best_alpha = alpha;
                    }
                }
                out.alpha = best_alpha;
                ppo::TrainingRun fin = setup.optimizer->train(
                    out.program, best_run.final_params, sched.finish_epochs,
                    train_key(setup, round, batch, k, stream_id::kPhaseFinish));
                buffer_epoch_events(out, fin, round, batch);
                out.params = fin.final_params;
                out.last_run = fin;
                out.mts = std::max(out.mts, fin.mts);
                out.score = setup.optimizer->evaluate(out.params, eval_key(setup));
            } catch (const std::exception&) {
                out.failed = true;
            }
        });
        state.ledger.charge("uniform_probe", static_cast<long long>(sched.batch_size) *
                                                 n_alphas * sched.uniform_probe_epochs);
        state.ledger.charge("uniform_finish",
                            static_cast<long long>(sched.batch_size) * sched.finish_epochs);
        flush_candidates(setup, outcomes);
        for (const auto& c : outcomes) {
            state.mts = std::max(state.mts, c.mts);
            note_candidate_result(setup, round, batch, c);
        }

        // Candidates already finished training; filter without extra epochs.
        const bool improved = finish_and_filter(setup, state, round, batch, outcomes,
                                                /*finish_epochs=*/0, "finish",
                                                /*unconditional_accept=*/false);
        if (improved) break;
        if (batch + 1 == max_batches) {
            emit(setup, {{"event", "no_improvement"},
                         {"round", round},
                         {"batches", batch + 1},
                         {"v_best", state.v_best}});
        }
    }
    state.round = round;
    return state;
}

}  // namespace detail

/// Full experiment for the requested mode. Deterministic for a fixed
/// (mode, schedule, env, mock backend, seed).
inline CoEvolutionState run_experiment(const CoSetup& setup) {
    setup.schedule.validate();
    if (!setup.optimizer) throw Error("run_experiment requires a policy optimizer");
    CoEvolutionState state;
    detail::emit(setup, {{"event", "run_start"},
                         {"mode", setup.mode.to_string()},
                         {"env", setup.env.spec.name},
                         {"seed", setup.seed},
                         {"rounds", setup.schedule.n_rounds},
                         {"batch_size", setup.schedule.batch_size}});

    switch (setup.mode.mode) {
        case RunMode::roska:
        case RunMode::fixed_alpha:
            state = run_round_one(setup, std::move(state));
            for (int m = 2; m <= setup.schedule.n_rounds; ++m)
                state = run_dp_round(setup, std::move(state));
            break;
        case RunMode::eureka:
            for (int m = 1; m <= setup.schedule.n_rounds; ++m)
                state = detail::eureka_style_round(setup, std::move(state), m);
            break;
        case RunMode::roska_uniform:
            state = detail::eureka_style_round(setup, std::move(state), 1);
            for (int m = 2; m <= setup.schedule.n_rounds; ++m)
                state = detail::uniform_dp_round(setup, std::move(state));
            break;
    }

    runstore::Event end;
    end["event"] = "run_end";
    end["v_best"] = state.v_best;
    end["mts"] = state.mts;
    end["total_epochs"] = state.ledger.total();
    nlohmann::ordered_json ledger;
    for (const auto& [category, epochs] : state.ledger.by_category) ledger[category] = epochs;
    end["ledger"] = ledger;
    detail::emit(setup, end);

    if (setup.store && !state.best_params.values.empty()) {
        policy::save_checkpoint((setup.store->dir() / "checkpoints/theta_best_final.json").string(),
                                state.best_params, setup.optimizer->arch(),
                                "seed=" + std::to_string(setup.seed));
    }
    return state;
}

}  // namespace roska::coevo
