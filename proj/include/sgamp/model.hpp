#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sgamp {

using Vector = Eigen::VectorXd;
/// Sensing matrices are dense, row-major, 64-bit.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Seeded generator with reproducible per-trial streams.
///
/// A stream is identified by (master_seed, stream ids...); the same identity
/// always yields the same sequence, independent of which thread draws it or
/// in which order trials are executed.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    static Rng for_stream(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b = 0);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

enum class PriorKind { Gaussian, ConstantAmplitude, DiscreteMixture };

struct MixturePoint {
    double value;
    double probability;
};

/// Distribution of the scaled non-zero signal element U = sqrt(k) x_n.
///
/// Constant-amplitude priors are stored as the symmetric two-point mixture
/// {+u, -u} with equal weights, so every non-Gaussian prior exposes its
/// atoms through points().
class Prior {
public:
    static constexpr std::size_t kMaxPoints = 64;

    static Prior gaussian(double variance);
    static Prior constant_amplitude(double amplitude);
    static Prior discrete(std::vector<MixturePoint> points);

    /// Parses "gauss:P", "const:u" or "mix:u1@p1,u2@p2,...". Throws ConfigError.
    static Prior parse(std::string_view text);

    PriorKind kind() const { return kind_; }
    bool is_gaussian() const { return kind_ == PriorKind::Gaussian; }
    bool is_discrete() const { return kind_ != PriorKind::Gaussian; }

    /// Variance of the Gaussian slab; only meaningful for Gaussian priors.
    double gaussian_variance() const { return variance_; }
    std::span<const MixturePoint> points() const { return points_; }

    /// P = E[U^2].
    double second_moment() const;
    double fourth_moment() const;
    /// Essential minimum of |U| (0 for the Gaussian prior).
    double min_amplitude() const;
    bool symmetric() const;

    /// Same shape with E[U^2] = 1.
    Prior scaled_to_unit_power() const;

    double sample(Rng& rng) const;

    std::string describe() const;

private:
    Prior() = default;

    PriorKind kind_ = PriorKind::Gaussian;
    double variance_ = 1.0;
    std::vector<MixturePoint> points_;
};

/// Problem size with M = max(1, round(delta * k * ln(N/k))).
struct ProblemDims {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    double delta = 0.0;

    static ProblemDims make(std::size_t n, std::size_t k, double delta);

    /// ln(N/k).
    double log_ratio() const;
    /// M / (k ln(N/k)): the prefactor actually realised after rounding M.
    double delta_eff() const;
};

enum class ChannelKind { Linear, OneBitSign };

struct Channel {
    ChannelKind kind = ChannelKind::Linear;
    double noise_variance = 0.0;

    static Channel linear(double sigma2);
    static Channel one_bit(double sigma2);
    /// "linear" / "onebit" (aliases "1bit", "sign").
    static Channel parse(std::string_view kind, double sigma2);

    std::string name() const;
};

struct SignalInstance {
    Vector x;
    std::vector<std::size_t> support; // sorted ascending
    Vector u;                         // scaled values, aligned with support
};

SignalInstance sample_signal(const ProblemDims& dims, const Prior& prior, Rng& rng);
Matrix sample_matrix(const ProblemDims& dims, Rng& rng);
/// y = z + w (linear) or y = sign(z + w) with sign(0) = +1.
Vector apply_channel(const Channel& channel, const Vector& z, Rng& rng);

/// 10^(-snr_db / 10) for unit signal power.
double noise_variance_from_snr_db(double snr_db);

} // namespace sgamp
