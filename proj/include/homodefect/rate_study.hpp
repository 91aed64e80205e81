#pragma once

#include <string>
#include <vector>

#include "homodefect/twoscale.hpp"

namespace homodefect {

// nu_r = min(1, d/r); throws CriticalExponent at r = d (critical case, the
// corrector need not even be bounded there).
double nu_r(int dim, double r);

// OLS on (log eps, log value); with log_correction the value is divided by
// ln(2 + 1/eps) first (the W^{1,inf} channel carries that factor). Returns
// (slope, standard error). Needs >= 4 strictly positive values.
std::pair<double, double> fit_slope(const std::vector<std::pair<double, double>>& points,
                                    bool log_correction = false);

struct StudyConfig {
    CoefficientSpec spec;
    SourceSpec source;
    double L = 1.0;              // Omega = (-L, L)^d
    double omega1_margin = 0.5;  // Omega1 = (-L + margin, L - margin)^d
    std::vector<double> eps;     // strictly decreasing, >= 4 entries
    int nodes_per_eps = 16;      // fine-grid resolution rule: h = eps / nodes_per_eps
    int cell_resolution = 64;
    int box_resolution = 8;
    int truncation_radius = 0;   // 0 = auto: diam(Omega)/eps_min + 2
    double slope_tolerance = 0.15;
    bool run_periodic_mode = true;
    std::string residual_check = "auto";  // "on" | "off" | "auto" (skip on big grids)
    unsigned seed = 0;
    std::string cache_dir;
    bool allow_large = false;

    void validate() const;
    Box omega1() const;
    int auto_truncation_radius() const;
};

StudyConfig parse_study_config(const std::string& json_text);

struct RunRecord {
    double eps = 0.0;
    std::string mode;  // "full" | "periodic"
    NormsRecord norms;
    double residual_identity = -1.0;  // -1 = not computed
    long nodes = 0;
    double h = 0.0;
    double seconds = 0.0;
    std::string error;  // nonempty when this eps failed; study continues
};

struct ChannelFit {
    std::string channel;
    std::string mode;
    double slope = 0.0;
    double stderr_ = 0.0;
    std::string verdict;  // PASS | FAIL | DEGENERATE | INFO
};

struct RateStudyReport {
    StudyConfig config;
    double nu = 0.0;  // target exponent (1 when no defect)
    std::string label;
    std::array<std::array<double, 3>, 3> astar{};
    double astar_asymmetry = 0.0;
    std::vector<RunRecord> runs;
    std::vector<RunRecord> oracle_runs;  // 1D cross-check, empty otherwise
    std::vector<ChannelFit> fits;
    bool pass = true;
    double total_seconds = 0.0;
};

RateStudyReport run_rate_study(const StudyConfig& config);

struct CompareReport {
    StudyConfig config;
    std::vector<double> eps;
    std::vector<double> rho;       // full / periodic-only interior W^{1,inf} ratio
    std::vector<double> per_only;  // the stalled channel itself
    std::vector<double> full;
    double per_only_slope = 0.0;
    std::string verdict;
    double total_seconds = 0.0;
};

CompareReport compare_correctors(const StudyConfig& config);

// report.json, rates.csv, slopes.csv, per-channel .dat (log10-log10), and
// summary.txt. Content is deterministic; wall-clock data lives only in the
// "timings" and "environment" keys of report.json.
void emit_outputs(const RateStudyReport& report, const std::string& out_dir);
void emit_outputs(const CompareReport& report, const std::string& out_dir);

}  // namespace homodefect
