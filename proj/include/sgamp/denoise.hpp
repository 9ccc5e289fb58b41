#pragma once

#include "sgamp/model.hpp"

namespace sgamp {

/// Parameters of the spike-and-slab (Bayesian) inner denoiser.
///
/// Sizes enter only through k and the log-odds ln((N-k)/k), so the
/// denoiser can be evaluated for astronomically large N (e.g. N = 2^1000)
/// without forming N itself.
struct InnerDenoiserParams {
    Prior prior;
    double k = 1.0;
    double log_null_odds = 0.0; // ln((N - k) / k)
    double v_tilde = 1.0;       // v / ln(N/k)
    bool symmetric = true;

    static InnerDenoiserParams make(const Prior& prior, double n, double k, double v_tilde);
    static InnerDenoiserParams from_log2(const Prior& prior, double log2_n, double log2_k, double v_tilde);

    /// Per-element noise variance v_tilde / k of the unscaled observation.
    double v_kn() const { return v_tilde / k; }
};

/// log E_U[p_G(y_scaled - U; v)].
double log_evidence(const Prior& prior, double y_scaled, double v);

/// Slab posterior moment E[U^order | U + N(0, v) = y_scaled], order in {1, 2}.
double posterior_moment(const Prior& prior, double y_scaled, double v, int order);

/// Posterior probability that the element is active, given the scaled observation.
double activity_probability(const InnerDenoiserParams& params, double y_scaled);

/// Everything the inner module needs about one scalar observation y = x + N(0, v_tilde/k).
struct ScalarPosterior {
    double activity;      // Pr(active | y)
    double inactivity;    // 1 - activity without cancellation
    double slab_mean;     // E[U | y, active]
    double slab_variance; // Var[U | y, active]
    double mean;          // E[X | y]
    double second_moment; // E[X^2 | y]
    double variance;      // Var[X | y] >= 0
    double derivative;    // d E[X | y] / dy = variance / v_kn
};

ScalarPosterior scalar_posterior(const InnerDenoiserParams& params, double y);

inline double posterior_mean(const InnerDenoiserParams& p, double y) { return scalar_posterior(p, y).mean; }
inline double posterior_second_moment(const InnerDenoiserParams& p, double y) {
    return scalar_posterior(p, y).second_moment;
}
inline double posterior_variance(const InnerDenoiserParams& p, double y) { return scalar_posterior(p, y).variance; }
inline double posterior_mean_derivative(const InnerDenoiserParams& p, double y) {
    return scalar_posterior(p, y).derivative;
}

struct InnerResult {
    Vector x_hat;
    double xi_in; // (1/M) sum of denoiser derivatives
};

/// Element-wise Bayesian inner denoiser with v_tilde = v_out / (delta_eff ln(N/k)).
InnerResult inner_denoise(const Prior& prior, const ProblemDims& dims, const Vector& x_t, double v_out);

struct OuterEval {
    double value;
    double dz; // partial derivative with respect to z_t
};

/// (z_t - y) / (sigma2 + v_in).
OuterEval outer_linear(double z_t, double y, double v_in, double sigma2);

/// Bayes-optimal outer denoiser for y = sign(z + w), y in {-1, +1}.
OuterEval outer_onebit(double z_t, double y, double v_in, double sigma2);

OuterEval outer_denoise(const Channel& channel, double z_t, double y, double v_in);

/// Inverse Mills ratio minus its argument, phi(u)/Q(u) - u, without cancellation.
double inverse_mills_excess(double u);

} // namespace sgamp
