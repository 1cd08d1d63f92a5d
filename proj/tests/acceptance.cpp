// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Criteria 8-10 run real PPO on the desk environments at a
// reduced schedule; everything else is closed-form or oracle-checked.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "roska/roska.hpp"

using namespace roska;

namespace {

int g_failures = 0;

struct Criterion {
    int number;
    const char* name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    void check(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }

    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name,
                    secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

// --------------------------------------------------------------------------
// 1. TTS accounting

void criterion_1() {
    Criterion c{1, "TTS accounting reproduces the closed-form epoch totals"};
    const coevo::Schedule s;
    const auto roska = metrics::compute_tts(s, {coevo::RunMode::roska});
    const long long round1 = 6LL * s.first_round_probe_epochs + s.first_round_finish_epochs;
    c.check(round1 == 5500, "round one != 5500");
    c.check(roska.total_epochs - round1 == 74800, "dp rounds != 74800");
    c.check(roska.total_epochs == 80300, "total != 80300");
    c.check(std::abs(roska.ratio_vs_eureka - 0.89) <= 0.005, "ratio not 0.89 +/- 0.005");

    const auto eureka = metrics::compute_tts(s, {coevo::RunMode::eureka});
    c.check(eureka.total_epochs == 90000, "eureka total != 90000");
    c.check(eureka.ratio_vs_eureka == 1.0, "eureka ratio != 1");

    const auto v074 =
        metrics::compute_tts(coevo::Schedule::budget_variant_074(), {coevo::RunMode::roska});
    c.check(v074.total_epochs == 66800, "variant total != 66800");
    c.check(std::abs(v074.ratio_vs_eureka - 0.74) <= 0.005, "variant ratio not 0.74");
    const auto v056 =
        metrics::compute_tts(coevo::Schedule::budget_variant_056(), {coevo::RunMode::roska});
    c.check(v056.total_epochs == 50400, "variant total != 50400");
    c.check(std::abs(v056.ratio_vs_eureka - 0.56) <= 0.005, "variant ratio not 0.56");

    const auto uniform = metrics::compute_tts(s, {coevo::RunMode::roska_uniform});
    c.check(uniform.total_epochs == 210000, "uniform total != 210000");
    c.check(std::abs(uniform.ratio_vs_eureka - 210000.0 / 90000.0) < 1e-9,
            "uniform ratio != 210000/90000");
    c.check(!uniform.note.empty() && uniform.note.find("2.2") != std::string::npos,
            "computed-vs-nominal ratio discrepancy (2.33 vs 2.2) not surfaced");
}

// --------------------------------------------------------------------------
// 2. HNS

void criterion_2() {
    Criterion c{2, "HNS endpoints exact; reference Ant row reproduces 0.973"};
    c.check(metrics::compute_hns(10.35, 6.59, 10.35) == 1.0, "method=human != 1");
    c.check(metrics::compute_hns(6.59, 6.59, 10.35) == 0.0, "method=sparse != 0");
    c.check(std::abs(metrics::compute_hns(10.25, 6.59, 10.35) - 0.973) <= 0.001,
            "Ant row != 0.973 +/- 0.001");
}

// --------------------------------------------------------------------------
// 3. Fusion

void criterion_3() {
    Criterion c{3, "fusion endpoints bit-exact; linearity/self-fusion on 1000 vectors"};
    policy::NetArch arch;
    arch.obs_dim = 3;
    arch.action_dim = 2;
    RngStream rng(404);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        const auto a = policy::init_params(arch, rng.next_u64());
        const auto b = policy::init_params(arch, rng.next_u64());
        c.check(policy::fuse(a, b, 1.0).values == a.values, "alpha=1 endpoint not bit-exact");
        c.check(policy::fuse(a, b, 0.0).values == b.values, "alpha=0 endpoint not bit-exact");
        const double a1 = rng.uniform(), a2 = rng.uniform();
        const auto f1 = policy::fuse(a, b, a1);
        const auto f2 = policy::fuse(a, b, a2);
        const auto fm = policy::fuse(a, b, (a1 + a2) / 2.0);
        const auto self = policy::fuse(a, a, rng.uniform());
        for (std::size_t i = 0; i < f1.values.size() && c.ok; ++i) {
            c.check(std::abs(static_cast<double>(f1.values[i]) + f2.values[i] -
                             2.0 * fm.values[i]) <= 1e-6,
                    "linearity violated");
            c.check(std::abs(static_cast<double>(self.values[i]) - a.values[i]) <= 1e-6,
                    "self-fusion violated");
        }
    }
}

// --------------------------------------------------------------------------
// 4. GP / EI

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
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t k = r + 1; k < n; ++k) acc -= a[r][k] * x[k];
        x[r] = acc / a[r][r];
    }
    return x;
}

void criterion_4() {
    Criterion c{4, "GP posterior vs dense-solve oracle; EI vs closed form and Monte Carlo"};
    {
        bo::GpState gp({1.0, 0.2, 0.0});
        gp.add(0.5, 2.0);
        const auto post = gp.posterior(0.5);
        c.check(std::abs(post.mean - 2.0) <= 1e-8 && post.variance <= 1e-8,
                "noise-free interpolation exceeds 1e-8");
    }
    RngStream rng(505);
    for (int trial = 0; trial < 20 && c.ok; ++trial) {
        bo::GpKernel kernel{rng.uniform(0.5, 3.0), rng.uniform(0.1, 0.5),
                            rng.uniform(0.0, 1e-2)};
        bo::GpState gp(kernel);
        std::vector<std::pair<double, double>> data;
        const int n = 3 + static_cast<int>(rng.uniform_int(5));
        for (int i = 0; i < n; ++i) {
            const double alpha = (i + rng.uniform(0.1, 0.9)) / n;
            const double score = rng.uniform(-3.0, 3.0);
            data.emplace_back(alpha, score);
            gp.add(alpha, score);
        }
        auto kern = [&](double x, double y) {
            const double d = (x - y) / kernel.length_scale;
            return kernel.signal_var * std::exp(-0.5 * d * d);
        };
        for (double q : {0.11, 0.42, 0.77}) {
            const auto un = static_cast<std::size_t>(n);
            std::vector<std::vector<double>> K(un, std::vector<double>(un));
            std::vector<double> y(un), ks(un);
            for (std::size_t i = 0; i < un; ++i) {
                y[i] = data[i].second;
                ks[i] = kern(q, data[i].first);
                for (std::size_t j = 0; j < un; ++j)
                    K[i][j] = kern(data[i].first, data[j].first);
                K[i][i] += kernel.noise_var;
            }
            const auto w = solve_dense(K, y);
            const auto u = solve_dense(K, ks);
            double mean = 0.0, variance = kern(q, q);
            for (std::size_t i = 0; i < un; ++i) {
                mean += ks[i] * w[i];
                variance -= ks[i] * u[i];
            }
            variance = std::max(variance, 0.0);
            const auto post = gp.posterior(q);
            c.check(std::abs(post.mean - mean) <= 1e-8, "posterior mean off oracle > 1e-8");
            c.check(std::abs(post.variance - variance) <= 1e-8,
                    "posterior variance off oracle > 1e-8");
        }
    }
    // EI closed form vs Monte Carlo: 1e6 samples, 3 standard errors, 20 cases.
    for (int trial = 0; trial < 20 && c.ok; ++trial) {
        const double mu = rng.uniform(-1.0, 2.0);
        const double sigma = rng.uniform(0.3, 2.0);
        const double s_best = mu + sigma * rng.uniform(-2.0, 2.0);
        const double xi = rng.uniform(0.0, 0.1);
        const int n = 1000000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = std::max(0.0, mu + sigma * rng.normal() - s_best - xi);
            sum += v;
            sum_sq += v * v;
        }
        const double mc = sum / n;
        const double se = std::sqrt(std::max(sum_sq / n - mc * mc, 0.0) / n);
        const double ei = bo::expected_improvement(mu, sigma * sigma, s_best, xi);
        c.check(std::abs(ei - mc) <= 3.0 * se, "EI outside 3 standard errors of Monte Carlo");
    }
    bo::GpState gp({1.0, 0.2, 1e-6});
    gp.add(0.1, -1.0);
    gp.add(0.6, 2.0);
    gp.add(0.95, 0.3);
    for (int g = 0; g <= 1000 && c.ok; ++g)
        c.check(bo::expected_improvement(gp, g / 1000.0, 2.0, 0.01) >= 0.0,
                "EI negative on grid");
}

// --------------------------------------------------------------------------
// 5. SC-BO on the stub objective

void criterion_5() {
    Criterion c{5, "SC-BO finds the stub optimum within 0.05 on 10 seeds; budget J*T_BO exact"};
    policy::NetArch arch;
    arch.obs_dim = 1;
    arch.action_dim = 1;
    arch.hidden = {2};
    const auto best = policy::init_params(arch, 1);
    const auto theta0 = policy::init_params(arch, 2);
    bo::BoConfig cfg;  // J = 12, T_BO = 200
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        int epochs_charged = 0, calls = 0;
        bo::BoTrainFn fn = [&](const dsl::RewardProgram&, const policy::ParamVector& fused,
                               int epochs, std::uint64_t) {
            ++calls;
            epochs_charged += epochs;
            double alpha = 0.0;
            for (std::size_t i = 0; i < fused.values.size(); ++i) {
                const double denom =
                    static_cast<double>(best.values[i]) - static_cast<double>(theta0.values[i]);
                if (std::abs(denom) > 1e-6) {
                    alpha = (static_cast<double>(fused.values[i]) - theta0.values[i]) / denom;
                    break;
                }
            }
            bo::BoOutcome out;
            out.score = -(alpha - 0.3) * (alpha - 0.3);
            out.params = fused;
            return out;
        };
        const auto result =
            bo::sc_bo_search(testing_support::bandit_reward(), best, theta0, cfg, fn, seed);
        c.check(std::abs(result.alpha_star - 0.3) <= 0.05,
                "alpha_star off optimum at seed " + std::to_string(seed));
        c.check(calls == cfg.total_evaluations, "evaluation count != J");
        c.check(epochs_charged == cfg.total_evaluations * cfg.epochs_per_evaluation,
                "epoch budget != J * T_BO");
    }
}

// --------------------------------------------------------------------------
// 6. PPO sanity

void criterion_6() {
    Criterion c{6, "bandit convergence 5/5 seeds; gradient check < 1e-3; GAE == Monte Carlo"};
    const auto env = testing_support::bandit_factory();
    policy::NetArch arch;
    arch.obs_dim = 1;
    arch.action_dim = 1;
    ppo::PpoConfig cfg;
    cfg.rollout_steps = 32;
    cfg.n_envs = 4;
    cfg.eval_every = 50;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto init = policy::init_params(arch, seed);
        const auto run =
            ppo::train(testing_support::bandit_reward(), init, 200, cfg, env, seed + 100);
        const auto out = policy::forward(run.final_params, arch, Eigen::VectorXd::Ones(1));
        const double p_better =
            0.5 * std::erfc(-out.action_mean(0) / std::exp(out.action_log_std(0)) /
                            std::numbers::sqrt2);
        c.check(p_better > 0.9, "better-arm probability <= 0.9 at seed " + std::to_string(seed));
    }

    policy::NetArch garch;
    garch.obs_dim = 3;
    garch.action_dim = 2;
    garch.hidden = {8, 8};
    const auto params = policy::init_params(garch, 5);
    const auto batch = ppo::make_gradcheck_batch(garch, params, 32, 7);
    const double err = ppo::surrogate_grad_check(ppo::PpoConfig{}, params, garch, batch);
    c.check(err < 1e-3, "gradient check error >= 1e-3");

    Eigen::MatrixXd rewards(3, 1), values(3, 1);
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> dones(3, 1);
    rewards << 1.0, 2.0, 3.0;
    values << 0.5, 0.25, 0.125;
    dones << 0, 0, 1;
    Eigen::VectorXd bootstrap(1);
    bootstrap << 42.0;
    Eigen::MatrixXd adv, ret;
    ppo::compute_gae(rewards, values, dones, bootstrap, 1.0, 1.0, adv, ret);
    c.check(adv(0, 0) == 6.0 - 0.5 && adv(1, 0) == 5.0 - 0.25 && adv(2, 0) == 3.0 - 0.125,
            "GAE(1,1) != Monte Carlo advantages");
}

// --------------------------------------------------------------------------
// 7. DSL

void criterion_7() {
    Criterion c{7, "1000 round-trips; adversarial finiteness; reference program weights"};
    const std::vector<std::string> pool = {"x", "y", "rot_dist", "speed"};
    const std::vector<double> adversarial = {1e30, -1e30, 0.0, -0.0, 1e-30, 7.5};
    RngStream rng(606);
    for (std::uint64_t k = 0; k < 1000 && c.ok; ++k) {
        const auto p = testing_support::random_program(k, pool);
        c.check(dsl::equal(p, dsl::parse(dsl::print(p))),
                "round-trip failed at key " + std::to_string(k));
        std::map<std::string, double> feats;
        for (const auto& f : pool) feats[f] = adversarial[rng.uniform_int(adversarial.size())];
        const auto r = dsl::evaluate(p, feats);
        bool finite = std::isfinite(r.total);
        for (const auto& [name, v] : r.components) finite = finite && std::isfinite(v);
        c.check(finite, "non-finite evaluation at key " + std::to_string(k));
    }
    const auto p = dsl::parse(
        "component orientation_diff_reward { temp = 0.1 expr = orientation_diff weight = 4.0 }"
        "component angvel_penalty_reward { temp = 0.1 expr = abs_angvel weight = -2.0 }"
        "component orientation_diff_decrease_reward { temp = 0.1 expr = orientation_diff "
        "weight = 2.0 }");
    c.check(p.components.size() == 3 && p.components[0].weight == 4.0 &&
                p.components[1].weight == -2.0 && p.components[2].weight == 2.0,
            "reference program weights not (4, -2, 2)");
}

// --------------------------------------------------------------------------
// Shared reduced-schedule real-PPO runner for criteria 8-10

ppo::PpoConfig reduced_ppo() {
    ppo::PpoConfig cfg;
    cfg.rollout_steps = 32;
    cfg.n_envs = 4;
    return cfg;
}

coevo::CoEvolutionState run_reduced(const std::string& env_name, coevo::ModeSpec mode,
                                    std::uint64_t seed, const coevo::Schedule& sched,
                                    std::vector<double>* v_curve = nullptr) {
    env::EnvFactory env = env::env_factory(env_name);
    coevo::PpoPolicyOptimizer optimizer(env, reduced_ppo(), 8);
    coevo::CoSetup setup;
    setup.mode = mode;
    setup.schedule = sched;
    setup.env = env;
    setup.backend = llm::mock_backend_for_env(env.spec, seed);
    setup.optimizer = &optimizer;
    setup.bo.total_evaluations = sched.bo_total_evaluations;
    setup.seed = seed;
    setup.parallel_candidates = 2;
    if (v_curve) {
        setup.events = [v_curve](const runstore::Event& e) {
            if (e.value("event", "") == "round_result")
                v_curve->push_back(e.value("v_best", 0.0));
        };
    }
    return coevo::run_experiment(setup);
}

// --------------------------------------------------------------------------
// 8. Co-evolution monotonicity at the stated reduced schedule

void criterion_8() {
    Criterion c{8, "v_best non-decreasing across rounds: 5 seeds x 3 envs, roska + mock"};
    coevo::Schedule sched;  // K=3, probe 100, finish 300, J=6, T_BO=50
    sched.n_rounds = 3;
    sched.batch_size = 3;
    sched.first_round_probe_epochs = 100;
    sched.first_round_finish_epochs = 300;
    sched.bo_total_evaluations = 6;
    sched.bo_epochs_per_evaluation = 50;
    sched.post_bo_epochs = 100;
    sched.finish_epochs = 300;
    sched.dynamic_population = true;
    for (const char* env_name : {"point-runner", "rotator", "latch-puller"}) {
        for (std::uint64_t seed = 0; seed < 5 && c.ok; ++seed) {
            std::vector<double> v_curve;
            run_reduced(env_name, {coevo::RunMode::roska}, seed, sched, &v_curve);
            c.check(!v_curve.empty(), "no round results recorded");
            for (std::size_t i = 1; i < v_curve.size(); ++i)
                c.check(v_curve[i] + 1e-12 >= v_curve[i - 1],
                        std::string(env_name) + " seed " + std::to_string(seed) +
                            ": v_best decreased");
        }
    }
}

// --------------------------------------------------------------------------
// 9. Relative performance at equal budget

void criterion_9() {
    Criterion c{9, "equal-budget medians: roska >= eureka and fixed-alpha=0 <= roska"};
    coevo::Schedule sched;
    sched.n_rounds = 3;
    sched.batch_size = 3;
    sched.first_round_probe_epochs = 50;
    sched.first_round_finish_epochs = 150;
    sched.bo_total_evaluations = 6;
    sched.bo_epochs_per_evaluation = 25;
    sched.post_bo_epochs = 50;
    sched.finish_epochs = 150;
    sched.eureka_epochs = 200;  // 3x3x200 = 1800 = 300 + 2x750
    sched.dynamic_population = false;
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (const char* env_name : {"point-runner", "rotator"}) {
        std::vector<double> roska, eureka, fixed0;
        long long budget = -1;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto sr = run_reduced(env_name, {coevo::RunMode::roska}, seed, sched);
            const auto se = run_reduced(env_name, {coevo::RunMode::eureka}, seed, sched);
            const auto sf =
                run_reduced(env_name, {coevo::RunMode::fixed_alpha, 0.0}, seed, sched);
            roska.push_back(sr.v_best);
            eureka.push_back(se.v_best);
            fixed0.push_back(sf.v_best);
            if (budget < 0) budget = sr.ledger.total();
            c.check(sr.ledger.total() == budget && se.ledger.total() == budget &&
                        sf.ledger.total() == budget,
                    "modes not budget-matched");
        }
        const double mr = median(roska), me = median(eureka), mf = median(fixed0);
        std::printf("  criterion 9 medians on %s: roska=%.4f eureka=%.4f fixed-alpha-0=%.4f\n",
                    env_name, mr, me, mf);
        std::fflush(stdout);
        c.check(mr >= me, std::string(env_name) + ": roska median below eureka");
        c.check(mf <= mr, std::string(env_name) + ": fixed-alpha=0 median above roska");
    }
}

// --------------------------------------------------------------------------
// 10. Reproducibility

void criterion_10() {
    Criterion c{10, "identical (config, seed, mock backend) -> byte-identical events.jsonl"};
    const auto base = std::filesystem::temp_directory_path() / "roska_acceptance_repro";
    std::filesystem::remove_all(base);
    coevo::Schedule tiny;
    tiny.n_rounds = 2;
    tiny.batch_size = 2;
    tiny.first_round_probe_epochs = 20;
    tiny.first_round_finish_epochs = 40;
    tiny.bo_total_evaluations = 6;
    tiny.bo_epochs_per_evaluation = 10;
    tiny.post_bo_epochs = 20;
    tiny.finish_epochs = 40;
    tiny.dynamic_population = false;
    auto run_once = [&](const std::string& tag) {
        const auto dir = base / tag;
        runstore::RunStore store(dir);
        env::EnvFactory env = env::env_factory("rotator");
        coevo::PpoPolicyOptimizer optimizer(env, reduced_ppo(), 4);
        coevo::CoSetup setup;
        setup.mode = {coevo::RunMode::roska};
        setup.schedule = tiny;
        setup.env = env;
        setup.backend = llm::mock_backend_for_env(env.spec, 21);
        setup.optimizer = &optimizer;
        setup.bo.total_evaluations = tiny.bo_total_evaluations;
        setup.seed = 21;
        setup.parallel_candidates = 2;
        setup.store = &store;
        setup.events = store.event_sink();
        coevo::run_experiment(setup);
        std::ifstream in(dir / "events.jsonl", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string a = run_once("a");
    const std::string b = run_once("b");
    c.check(!a.empty(), "no events written");
    c.check(a == b, "event logs differ between identical runs");
    std::filesystem::remove_all(base);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures;
}
