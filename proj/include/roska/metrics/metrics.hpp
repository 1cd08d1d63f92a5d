#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "roska/coevo/schedule.hpp"
#include "roska/common/errors.hpp"

namespace roska::metrics {

/// Human-normalized score: (method - sparse) / |human - sparse|.
/// 1 means parity with the human-designed reward baseline.
inline double compute_hns(double method_mts, double sparse_mts, double human_mts) {
    const double denom = std::abs(human_mts - sparse_mts);
    if (denom < 1e-12)
        throw DegenerateBaseline("human and sparse baselines coincide; HNS undefined");
    return (method_mts - sparse_mts) / denom;
}

struct TtsReport {
    long long total_epochs = 0;
    long long eureka_epochs = 0;   // baseline for the ratio, same N and K
    double ratio_vs_eureka = 0.0;
    double nominal_ratio = 0.0;    // commonly stated figure for this mode, if any
    std::string note;              // filled when computed and nominal disagree
};

/// Closed-form epoch totals for fixed-size rounds, by mode. Mirrors the
/// orchestrator's ledger arithmetic exactly.
inline TtsReport compute_tts(const coevo::Schedule& s, const coevo::ModeSpec& mode) {
    s.validate();
    TtsReport report;
    const long long K = s.batch_size, N = s.n_rounds;
    report.eureka_epochs = N * K * s.eureka_epochs;

    switch (mode.mode) {
        case coevo::RunMode::eureka:
            report.total_epochs = report.eureka_epochs;
            report.nominal_ratio = 1.0;
            break;
        case coevo::RunMode::roska:
        case coevo::RunMode::fixed_alpha: {
            const long long round1 =
                K * s.first_round_probe_epochs + s.first_round_finish_epochs;
            const long long dp = K * s.bo_total_evaluations * s.bo_epochs_per_evaluation +
                                 K * s.post_bo_epochs + s.finish_epochs;
            report.total_epochs = round1 + (N - 1) * dp;
            report.nominal_ratio = 0.89;
            break;
        }
        case coevo::RunMode::roska_uniform: {
            const long long round1 = K * s.eureka_epochs;
            const long long dp =
                K * (static_cast<long long>(s.uniform_alphas_count) * s.uniform_probe_epochs +
                     s.finish_epochs);
            report.total_epochs = round1 + (N - 1) * dp;
            report.nominal_ratio = 2.2;
            break;
        }
    }
    report.ratio_vs_eureka =
        static_cast<double>(report.total_epochs) / static_cast<double>(report.eureka_epochs);
    if (std::abs(report.ratio_vs_eureka - report.nominal_ratio) > 0.05) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "schedule arithmetic gives %lld/%lld = %.4f, not the nominal ratio %.2f",
                      report.total_epochs, report.eureka_epochs, report.ratio_vs_eureka,
                      report.nominal_ratio);
        report.note = buf;
    }
    return report;
}

}  // namespace roska::metrics
