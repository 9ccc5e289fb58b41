#pragma once

#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgamp/config.hpp"
#include "sgamp/model.hpp"

namespace sgamp {

/// One metric row of the raw per-trial CSV.
struct TrialRecord {
    std::size_t delta_index = 0;
    double delta_eff = 0.0;
    std::string algorithm;
    int trial = 0;
    int iter = 0;
    bool final = false;
    std::optional<double> use; // ||x_hat - x||^2; NaN after a failure
    std::optional<double> nse; // normalized-error squared norm
    std::optional<bool> support_ok;
    std::optional<double> seconds;
};

struct SummaryRow {
    double delta_eff = 0.0;
    std::string algorithm;
    int iter = 0;
    bool final = false;
    std::size_t count = 0;
    std::size_t failed = 0;
    double use_mean = 0, use_median = 0, use_p10 = 0, use_p90 = 0;
    double nse_mean = 0, nse_median = 0, nse_p10 = 0, nse_p90 = 0;
    std::optional<double> support_rate;
};

struct LambdaChoice {
    std::size_t delta_index;
    std::string algorithm;
    double factor; // multiplier applied to the per-trial center
    std::optional<double> lambda; // absolute value when the center is trial-independent
};

struct MonteCarloResult {
    std::vector<ProblemDims> dims; // one per requested delta
    std::vector<TrialRecord> records;
    std::vector<LambdaChoice> lambdas;
    std::vector<std::string> failures; // "delta_index/trial/algorithm: message"
};

/// Problem instance of one trial; identical for every algorithm of that trial.
struct TrialInstance {
    SignalInstance truth;
    Matrix a;
    Vector y;
};

TrialInstance make_trial(const ExperimentConfig& cfg, const ProblemDims& dims, std::size_t delta_index,
                         std::size_t trial);

/// Runs every (delta, trial, algorithm) of a gamp_sweep or convergence config.
MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg, int threads, std::ostream* log = nullptr);

std::vector<SummaryRow> summarize_records(const std::vector<TrialRecord>& records);

void write_raw_csv(std::ostream& os, const std::vector<TrialRecord>& records, bool timing);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct RunReport {
    std::vector<std::filesystem::path> files;
    std::size_t failed_runs = 0;
};

/// Executes the configured experiment and writes its CSV files (and plot
/// script) under cfg.output. Throws ConfigError for an unusable output path.
RunReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// requested > 0, else SUBLINEAR_GAMP_THREADS, else hardware concurrency.
int resolve_threads(int requested);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Gnuplot script for the figure analogue of an experiment, or empty.
std::string gnuplot_script(const ExperimentConfig& cfg, std::optional<double> weak_threshold = std::nullopt);
std::string figure_script_name(const ExperimentConfig& cfg);

} // namespace sgamp
