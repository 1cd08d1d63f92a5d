// Command-line surface: run experiments, rebuild reports from run
// directories, print schedule accounting, validate DSL files, and emit
// prompts/candidates without training.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "roska/roska.hpp"

#include "CLI11.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIncomplete = 4;

roska::llm::GeneratorBackend make_backend(const roska::RunConfig& cfg,
                                          const roska::env::EnvSpec& spec) {
    const auto mock = roska::llm::mock_backend_for_env(spec, cfg.seed);
    if (cfg.llm.backend == "mock") return mock;
    roska::llm::HttpBackend http;
    http.endpoint_url = cfg.llm.endpoint_url;
    http.model_name = cfg.llm.model_name;
    http.api_key_env_var = cfg.llm.api_key_env_var;
    http.temperature = cfg.llm.temperature;
    http.max_retries = cfg.llm.max_retries;
    http.timeout_s = cfg.llm.timeout_s;
    http.fallback_to_mock = cfg.llm.fallback_to_mock;
    http.fallback = mock;
    return http;
}

std::filesystem::path make_run_dir(const roska::RunConfig& cfg) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto stamp = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return std::filesystem::path(cfg.out_dir) /
           ("run-" + std::to_string(stamp) + "-" + std::to_string(cfg.seed));
}

int command_run(const roska::RunConfig& cfg) {
    const roska::env::EnvFactory env = roska::env::env_factory(cfg.env_name, cfg.env_overrides);
    roska::coevo::CoSetup setup;
    setup.mode = roska::coevo::ModeSpec::parse(cfg.mode);
    setup.schedule = cfg.schedule;
    setup.env = env;
    setup.backend = make_backend(cfg, env.spec);
    setup.bo = cfg.bo;
    setup.seed = cfg.seed;
    setup.parallel_candidates = cfg.parallel_candidates;

    roska::coevo::PpoPolicyOptimizer optimizer(env, cfg.ppo, cfg.eval_episodes);
    setup.optimizer = &optimizer;

    roska::runstore::RunStore store(make_run_dir(cfg));
    setup.store = &store;
    setup.events = store.event_sink();
    store.write_json("config.json", cfg.to_json());

    const auto state = roska::coevo::run_experiment(setup);

    roska::metrics::RunSummary summary = roska::metrics::summarize_run(store.dir());
    roska::metrics::MetricReport live = roska::metrics::build_report({summary});
    store.write_json("report.json", roska::metrics::report_to_json(live));
    store.write_text("report.csv", roska::metrics::report_to_csv(live));
    roska::metrics::ChartSeries curve;
    curve.label = cfg.mode + " seed " + std::to_string(cfg.seed);
    for (const auto& [round, v] : summary.round_curve)
        curve.points.emplace_back(static_cast<double>(round), v);
    store.write_text("plots/rounds.svg",
                     roska::metrics::render_line_chart("best return by round: " + cfg.env_name,
                                                       "round", "evaluated return", {curve}));

    std::printf("run complete: %s\n", store.dir().string().c_str());
    std::printf("  mode=%s env=%s seed=%llu\n", cfg.mode.c_str(), cfg.env_name.c_str(),
                static_cast<unsigned long long>(cfg.seed));
    std::printf("  v_best=%.6g mts=%.6g total_epochs=%lld\n", state.v_best, state.mts,
                state.ledger.total());
    return kExitOk;
}

int command_report(const std::vector<std::string>& run_dirs, const std::string& out,
                   const std::string& baselines_path) {
    std::map<std::string, roska::metrics::HnsBaseline> baselines;
    if (!baselines_path.empty()) {
        std::ifstream in(baselines_path);
        if (!in) throw roska::ConfigError("cannot open baselines file: " + baselines_path);
        nlohmann::json j;
        in >> j;
        for (const auto& [task, entry] : j.items())
            baselines[task] = {entry.at("sparse").get<double>(), entry.at("human").get<double>()};
    }
    std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
    const auto rep = roska::metrics::report(dirs, out, baselines);
    std::printf("report written to %s (%zu runs, %zu groups)\n", out.c_str(), rep.runs.size(),
                rep.aggregates.size());
    for (const auto& a : rep.aggregates) {
        std::printf("  %s / %s: mts %.4g +/- %.4g over %d seed(s)", a.task.c_str(),
                    a.mode.c_str(), a.mts_mean, a.mts_std, a.n_seeds);
        if (a.hns) std::printf(", hns %.4g", *a.hns);
        std::printf("\n");
    }
    for (const auto& note : rep.notes) std::printf("  note: %s\n", note.c_str());
    return kExitOk;
}

int command_tts(const roska::RunConfig& cfg, const std::string& mode_text) {
    const auto mode = roska::coevo::ModeSpec::parse(mode_text.empty() ? cfg.mode : mode_text);
    const auto tts = roska::metrics::compute_tts(cfg.schedule, mode);
    std::printf("mode=%s total_epochs=%lld eureka_baseline=%lld ratio=%.4f\n",
                mode.to_string().c_str(), tts.total_epochs, tts.eureka_epochs,
                tts.ratio_vs_eureka);
    if (!tts.note.empty()) std::printf("note: %s\n", tts.note.c_str());
    return kExitOk;
}

int command_validate(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", path.c_str());
        return kExitConfig;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        const auto program = roska::dsl::parse(text);
        std::printf("ok: %zu component(s)\n", program.components.size());
        for (const auto& c : program.components)
            std::printf("  %s: weight=%s temp=%s transform=%s\n", c.name.c_str(),
                        roska::dsl::format_real(c.weight).c_str(),
                        roska::dsl::format_real(c.temperature).c_str(),
                        roska::dsl::transform_name(c.transform));
        return kExitOk;
    } catch (const roska::Error& e) {
        std::fprintf(stderr, "invalid: %s\n", e.what());
        return kExitConfig;
    }
}

int command_gen(const roska::RunConfig& cfg, int round) {
    const roska::env::EnvFactory env = roska::env::env_factory(cfg.env_name, cfg.env_overrides);
    const auto backend = make_backend(cfg, env.spec);
    roska::llm::PromptContext ctx;
    if (round <= 1) {
        ctx = roska::llm::PromptContext::initial(env.spec);
    } else {
        // Dry-run feedback context: stands in for an incumbent when no run
        // directory is supplied.
        const auto mock = roska::llm::mock_backend_for_env(env.spec, cfg.seed);
        roska::llm::FeedbackStats stats;
        stats.snapshot_window = 10;
        roska::ppo::SeriesStats task;
        task.name = "task_score";
        task.snapshots.assign(10, 0.0);
        stats.task_score = task;
        task.name = "episode_lengths";
        stats.episode_lengths = task;
        ctx = roska::llm::PromptContext::feedback(env.spec, mock.template_pool.front(), stats);
    }
    const auto gen = roska::llm::generate_candidates(
        ctx, cfg.schedule.batch_size, backend,
        roska::RngStream::derive(cfg.seed, {roska::stream::kGenerate,
                                            static_cast<std::uint64_t>(round), 0}));
    std::printf("--- prompt (round %d) ---\n%s\n", round, gen.prompt.c_str());
    for (std::size_t k = 0; k < gen.candidates.size(); ++k) {
        std::printf("--- candidate %zu ---\n%s", k,
                    roska::dsl::print(gen.candidates[k].program).c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-policy co-evolution on desk-scale control tasks"};
    app.require_subcommand(1);

    std::string config_path, mode_override, seed_override, llm_override;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--mode", mode_override, "roska|eureka|roska-u|fixed-alpha=<a>");
    run->add_option("--seed", seed_override, "seed override");
    run->add_option("--llm", llm_override, "mock|http");

    std::vector<std::string> report_runs;
    std::string report_out = "report", baselines_path;
    auto* rep = app.add_subcommand("report", "aggregate completed runs");
    rep->add_option("--runs", report_runs, "run directories")->required()->expected(-1);
    rep->add_option("--out", report_out, "output directory");
    rep->add_option("--baselines", baselines_path,
                    "JSON of per-task {sparse, human} MTS baselines for HNS");

    std::string tts_config, tts_mode;
    auto* tts = app.add_subcommand("tts", "print schedule epoch accounting");
    tts->add_option("--config", tts_config, "run config JSON")->required();
    tts->add_option("--mode", tts_mode, "mode to account for");

    std::string dsl_path;
    auto* validate = app.add_subcommand("validate-dsl", "parse and validate a reward program");
    validate->add_option("file", dsl_path, "program file")->required();

    std::string gen_config;
    int gen_round = 1;
    auto* gen = app.add_subcommand("gen", "emit prompts and candidates without training");
    gen->add_option("--config", gen_config, "run config JSON")->required();
    gen->add_option("--round", gen_round, "round number (1 = zero-shot)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            roska::RunConfig cfg = roska::RunConfig::load(config_path);
            if (!mode_override.empty()) cfg.mode = mode_override;
            if (!seed_override.empty()) cfg.seed = std::stoull(seed_override);
            if (!llm_override.empty()) {
                if (llm_override != "mock" && llm_override != "http")
                    throw roska::ConfigError("--llm must be mock or http");
                cfg.llm.backend = llm_override;
            }
            roska::coevo::ModeSpec::parse(cfg.mode);
            if (cfg.llm.backend == "http" && cfg.llm.endpoint_url.empty())
                throw roska::ConfigError("llm.backend http requires endpoint_url");
            return command_run(cfg);
        }
        if (rep->parsed()) return command_report(report_runs, report_out, baselines_path);
        if (tts->parsed()) return command_tts(roska::RunConfig::load(tts_config), tts_mode);
        if (validate->parsed()) return command_validate(dsl_path);
        if (gen->parsed()) return command_gen(roska::RunConfig::load(gen_config), gen_round);
    } catch (const roska::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const roska::BackendUnavailable& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    } catch (const roska::IncompleteRun& e) {
        std::fprintf(stderr, "incomplete run: %s\n", e.what());
        return kExitIncomplete;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
