#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roska/dsl/print.hpp"
#include "roska/metrics/metrics.hpp"
#include "roska/metrics/svg.hpp"
#include "roska/runstore/run_store.hpp"

namespace roska::metrics {

/// Everything the report needs from one completed run, rebuilt from its
/// persisted config snapshot and event log.
struct RunSummary {
    std::string task;
    std::string mode;
    std::uint64_t seed = 0;
    double v_best = 0.0;
    double mts = 0.0;
    long long total_epochs = 0;
    std::vector<std::pair<int, double>> round_curve;  // v_best after each round
};

namespace detail {
// Non-finite doubles serialize as JSON null; treat those as the fallback.
inline double num_or(const runstore::Event& e, const char* key, double fallback) {
    if (!e.contains(key) || !e.at(key).is_number()) return fallback;
    return e.at(key).get<double>();
}
}  // namespace detail

inline RunSummary summarize_run(const std::filesystem::path& run_dir) {
    RunSummary s;
    {
        std::ifstream in(run_dir / "config.json");
        if (in) {
            nlohmann::json cfg;
            in >> cfg;
            s.task = cfg.value("env", nlohmann::json::object()).value("name", "");
            s.mode = cfg.value("mode", "");
            s.seed = cfg.value("seed", 0ULL);
        }
    }
    bool ended = false;
    for (const auto& e : runstore::load_events(run_dir)) {
        const std::string kind = e.value("event", "");
        if (kind == "run_start") {
            if (s.task.empty()) s.task = e.value("env", "");
            if (s.mode.empty()) s.mode = e.value("mode", "");
            s.seed = e.value("seed", s.seed);
        } else if (kind == "round_result") {
            const double v = detail::num_or(e, "v_best", 0.0);
            const int round = e.value("round", 0);
            if (!s.round_curve.empty() && s.round_curve.back().first == round)
                s.round_curve.back().second = v;
            else
                s.round_curve.emplace_back(round, v);
        } else if (kind == "run_end") {
            s.v_best = detail::num_or(e, "v_best", 0.0);
            s.mts = detail::num_or(e, "mts", 0.0);
            s.total_epochs = e.value("total_epochs", 0LL);
            ended = true;
        }
    }
    if (!ended) throw IncompleteRun("run has no run_end event: " + run_dir.string());
    return s;
}

/// Optional HNS baselines per task: MTS of the sparse-reward and
/// human-designed-reward references.
struct HnsBaseline {
    double sparse = 0.0;
    double human = 0.0;
};

struct MetricReport {
    struct Aggregate {
        std::string task;
        std::string mode;
        int n_seeds = 0;
        double mts_mean = 0.0;
        double mts_std = 0.0;  // sample std over seeds; 0 (flagged) for one seed
        double v_best_mean = 0.0;
        bool single_seed = false;
        std::optional<double> hns;
    };
    std::vector<Aggregate> aggregates;
    std::vector<RunSummary> runs;
    std::vector<std::string> notes;
};

inline MetricReport build_report(const std::vector<RunSummary>& runs,
                                 const std::map<std::string, HnsBaseline>& baselines = {}) {
    MetricReport report;
    report.runs = runs;
    std::map<std::pair<std::string, std::string>, std::vector<const RunSummary*>> groups;
    for (const auto& run : report.runs) groups[{run.task, run.mode}].push_back(&run);

    for (const auto& [key, members] : groups) {
        MetricReport::Aggregate agg;
        agg.task = key.first;
        agg.mode = key.second;
        agg.n_seeds = static_cast<int>(members.size());
        double sum = 0.0, vsum = 0.0;
        for (const auto* r : members) {
            sum += r->mts;
            vsum += r->v_best;
        }
        agg.mts_mean = sum / agg.n_seeds;
        agg.v_best_mean = vsum / agg.n_seeds;
        if (agg.n_seeds > 1) {
            double ss = 0.0;
            for (const auto* r : members) ss += (r->mts - agg.mts_mean) * (r->mts - agg.mts_mean);
            agg.mts_std = std::sqrt(ss / (agg.n_seeds - 1));
        } else {
            agg.single_seed = true;
            report.notes.push_back("task " + agg.task + " mode " + agg.mode +
                                   ": single seed, std not estimable (reported as 0)");
        }
        auto base = baselines.find(agg.task);
        if (base != baselines.end())
            agg.hns = compute_hns(agg.mts_mean, base->second.sparse, base->second.human);
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

inline nlohmann::ordered_json report_to_json(const MetricReport& report) {
    nlohmann::ordered_json j;
    j["aggregates"] = nlohmann::ordered_json::array();
    for (const auto& a : report.aggregates) {
        nlohmann::ordered_json row;
        row["task"] = a.task;
        row["mode"] = a.mode;
        row["n_seeds"] = a.n_seeds;
        row["mts_mean"] = a.mts_mean;
        row["mts_std"] = a.mts_std;
        row["v_best_mean"] = a.v_best_mean;
        row["single_seed"] = a.single_seed;
        if (a.hns) row["hns"] = *a.hns;
        j["aggregates"].push_back(row);
    }
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : report.runs) {
        nlohmann::ordered_json row;
        row["task"] = r.task;
        row["mode"] = r.mode;
        row["seed"] = r.seed;
        row["mts"] = r.mts;
        row["v_best"] = r.v_best;
        row["total_epochs"] = r.total_epochs;
        j["runs"].push_back(row);
    }
    j["notes"] = report.notes;
    return j;
}

inline std::string report_to_csv(const MetricReport& report) {
    std::string csv = "task,mode,seed,mts,v_best,total_epochs\n";
    for (const auto& r : report.runs) {
        csv += r.task + "," + r.mode + "," + std::to_string(r.seed) + "," +
               dsl::format_real(r.mts) + "," + dsl::format_real(r.v_best) + "," +
               std::to_string(r.total_epochs) + "\n";
    }
    return csv;
}

/// Per-round best-return curves, one row per (run, round).
inline std::string rounds_to_csv(const MetricReport& report) {
    std::string csv = "task,mode,seed,round,v_best\n";
    for (const auto& r : report.runs)
        for (const auto& [round, v] : r.round_curve)
            csv += r.task + "," + r.mode + "," + std::to_string(r.seed) + "," +
                   std::to_string(round) + "," + dsl::format_real(v) + "\n";
    return csv;
}

/// Parses report_to_csv output back into per-run rows.
inline std::vector<RunSummary> parse_report_csv(const std::string& csv) {
    std::vector<RunSummary> rows;
    std::size_t pos = csv.find('\n');  // skip header
    while (pos != std::string::npos && pos + 1 < csv.size()) {
        const std::size_t end = csv.find('\n', pos + 1);
        const std::string line = csv.substr(pos + 1, end == std::string::npos
                                                         ? std::string::npos
                                                         : end - pos - 1);
        pos = end;
        if (line.empty()) continue;
        RunSummary r;
        std::size_t c = 0;
        auto next = [&]() {
            const std::size_t comma = line.find(',', c);
            std::string field = line.substr(c, comma == std::string::npos ? std::string::npos
                                                                          : comma - c);
            c = comma == std::string::npos ? line.size() : comma + 1;
            return field;
        };
        r.task = next();
        r.mode = next();
        r.seed = std::stoull(next());
        r.mts = std::stod(next());
        r.v_best = std::stod(next());
        r.total_epochs = std::stoll(next());
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Builds the report for a set of completed run directories and writes
/// report.json, report.csv, and one per-task SVG of the per-round curves.
inline MetricReport report(const std::vector<std::filesystem::path>& run_dirs,
                           const std::filesystem::path& out_dir,
                           const std::map<std::string, HnsBaseline>& baselines = {}) {
    if (run_dirs.empty()) throw IncompleteRun("report requires at least one run directory");
    std::vector<RunSummary> runs;
    for (const auto& dir : run_dirs) runs.push_back(summarize_run(dir));
    MetricReport rep = build_report(runs, baselines);

    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "plots");
    {
        std::ofstream out(out_dir / "report.json");
        out << report_to_json(rep).dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir / "report.csv");
        out << report_to_csv(rep);
    }
    {
        std::ofstream out(out_dir / "rounds.csv");
        out << rounds_to_csv(rep);
    }
    std::map<std::string, std::vector<ChartSeries>> charts;
    for (const auto& r : rep.runs) {
        ChartSeries series;
        series.label = r.mode + " seed " + std::to_string(r.seed);
        for (const auto& [round, v] : r.round_curve)
            series.points.emplace_back(static_cast<double>(round), v);
        charts[r.task].push_back(std::move(series));
    }
    for (const auto& [task, series] : charts) {
        std::ofstream out(out_dir / "plots" / (task + "_rounds.svg"));
        out << render_line_chart("best return by round: " + task, "round", "evaluated return",
                                 series);
    }
    return rep;
}

}  // namespace roska::metrics
