#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgamp/model.hpp"

namespace sgamp {

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { SeChart, SeSweep, GampSweep, Convergence, Lemma1, Threshold };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

enum class Algorithm { Gamp, Fista, Omp, Biht, Glasso };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

struct AlgorithmSpec {
    Algorithm algorithm = Algorithm::Gamp;
    /// Iteration budget; 0 takes the experiment-level default (FISTA: 1000 linear, 20 one-bit).
    int iterations = 0;
    /// FISTA / GLasso: fixed weight. Unset selects it from a 12-point grid per delta.
    std::optional<double> lambda;
    int lambda_points = 12;
    double lambda_decades = 1.0; // grid spans center * 10^[-d, d]
    /// Trials used to select lambda; 0 uses every trial.
    int pilot_trials = 20;
    double tolerance = 1e-10;
    double step = 1.0; // BIHT step
    double damping = 1.0;

    std::string label() const { return std::string(to_string(algorithm)); }
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    ExperimentKind kind = ExperimentKind::GampSweep;
    std::string name;

    std::size_t n = 4096;
    std::size_t k = 16;
    std::optional<double> gamma; // k = round(N^gamma) when set
    std::vector<double> deltas;

    Channel channel = Channel::linear(1e-4);
    std::optional<double> snr_db; // overrides channel noise when set
    Prior prior = Prior::gaussian(1.0);

    std::vector<AlgorithmSpec> algorithms;
    int trials = 100;
    int iterations = 20;
    std::uint64_t master_seed = 1;
    std::filesystem::path output = "out";
    int threads = 0; // 0: SUBLINEAR_GAMP_THREADS, else hardware concurrency
    bool timing = false;
    bool plot = true;

    // se_chart / se_sweep / threshold
    std::size_t chart_points = 4000;
    int se_t_max = 10000;
    double se_tol = 1e-12;
    double delta_lo = 0.05;
    double delta_hi = 10.0;
    double delta_tol = 1e-4;

    // lemma1
    std::vector<double> log2_n = {20, 50, 100, 200, 500, 1000};
    std::vector<double> lemma_v = {0.5, 1.0, 2.0};

    /// Noise variance after applying snr_db relative to the prior power.
    double noise_variance() const;
    std::size_t sparsity() const;
};

/// Parses a JSON document; throws ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the configuration (all fields, defaults filled in).
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a hash of the canonical JSON without the execution-only fields
/// (threads, output), so the hash identifies the experiment itself.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Validates cross-field constraints; throws ConfigError.
void validate(const ExperimentConfig& cfg);

} // namespace sgamp
