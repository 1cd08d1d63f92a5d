#pragma once

#include <map>
#include <string>

#include "roska/common/errors.hpp"

namespace roska::coevo {

enum class RunMode { roska, eureka, roska_uniform, fixed_alpha };

struct ModeSpec {
    RunMode mode = RunMode::roska;
    double alpha = 0.0;  // fixed_alpha only

    std::string to_string() const {
        switch (mode) {
            case RunMode::roska:
                return "roska";
            case RunMode::eureka:
                return "eureka";
            case RunMode::roska_uniform:
                return "roska-u";
            case RunMode::fixed_alpha:
                return "fixed-alpha=" + std::to_string(alpha);
        }
        return "roska";
    }

    static ModeSpec parse(const std::string& text) {
        ModeSpec m;
        if (text == "roska") {
            m.mode = RunMode::roska;
        } else if (text == "eureka") {
            m.mode = RunMode::eureka;
        } else if (text == "roska-u") {
            m.mode = RunMode::roska_uniform;
        } else if (text.rfind("fixed-alpha=", 0) == 0) {
            m.mode = RunMode::fixed_alpha;
            try {
                m.alpha = std::stod(text.substr(12));
            } catch (const std::exception&) {
                throw ConfigError("cannot parse fixed-alpha value in '" + text + "'");
            }
            if (!(m.alpha >= 0.0 && m.alpha <= 1.0))
                throw ConfigError("fixed-alpha value must be in [0, 1]");
        } else {
            throw ConfigError("unknown mode '" + text +
                              "' (expected roska|eureka|roska-u|fixed-alpha=<a>)");
        }
        return m;
    }
};

/// Round structure and per-phase epoch counts. The defaults give the standard
/// accounting: round one 6x500 + 2500 = 5500, each subsequent round
/// 6x(200x12) + 300x6 + 2500 = 18700, total 80300 over 5 rounds.
struct Schedule {
    int n_rounds = 5;                     // N
    int batch_size = 6;                   // K
    int first_round_probe_epochs = 500;
    int first_round_finish_epochs = 2500;
    int bo_total_evaluations = 12;        // J
    int bo_epochs_per_evaluation = 200;   // T_BO
    int post_bo_epochs = 300;
    int finish_epochs = 2500;
    int uniform_alphas_count = 11;
    int uniform_probe_epochs = 500;
    int eureka_epochs = 3000;             // per-candidate epochs in eureka-style rounds
    bool dynamic_population = true;
    int max_batches_per_dp_round = 3;

    void validate() const {
        if (n_rounds < 1 || batch_size < 1 || first_round_probe_epochs < 0 ||
            first_round_finish_epochs < 0 || bo_total_evaluations < 1 ||
            bo_epochs_per_evaluation < 0 || post_bo_epochs < 0 || finish_epochs < 0 ||
            uniform_alphas_count < 2 || uniform_probe_epochs < 0 || eureka_epochs < 0 ||
            max_batches_per_dp_round < 1)
            throw ConfigError("invalid schedule");
    }

    /// Reduced-budget preset: J = 12 with a light 1300-epoch round tail
    /// (first round 6x200 + 2800 = 4000; total 66800).
    static Schedule budget_variant_074() {
        Schedule s;
        s.first_round_probe_epochs = 200;
        s.first_round_finish_epochs = 2800;
        s.post_bo_epochs = 0;
        s.finish_epochs = 1300;
        return s;
    }

    /// Reduced-budget preset: J = 9 with an 800-epoch round tail
    /// (first round 6x200 + 2800 = 4000; total 50400).
    static Schedule budget_variant_056() {
        Schedule s;
        s.first_round_probe_epochs = 200;
        s.first_round_finish_epochs = 2800;
        s.bo_total_evaluations = 9;
        s.post_bo_epochs = 0;
        s.finish_epochs = 800;
        return s;
    }

    static Schedule preset(const std::string& name) {
        if (name == "default") return Schedule{};
        if (name == "budget-074") return budget_variant_074();
        if (name == "budget-056") return budget_variant_056();
        throw ConfigError("unknown schedule preset '" + name + "'");
    }
};

/// Epoch accounting by phase; totals must reproduce the closed-form schedule
/// arithmetic for fixed-size rounds.
struct EpochLedger {
    std::map<std::string, long long> by_category;

    void charge(const std::string& category, long long epochs) {
        by_category[category] += epochs;
    }

    long long total() const {
        long long t = 0;
        for (const auto& [k, v] : by_category) t += v;
        return t;
    }
};

}  // namespace roska::coevo
