#pragma once

#include <span>
#include <vector>

#include "sgamp/model.hpp"

namespace sgamp {

inline constexpr int kDefaultHermiteOrder = 120;
/// "v_in,inf = 0" for continuous priors; discrete priors require exact zero.
inline constexpr double kZeroLimitThreshold = 1e-8;

struct SeOptions {
    int t_max = 10000;
    double tol = 1e-12;
    int quadrature_order = kDefaultHermiteOrder;
};

struct SeStep {
    double v_in;
    double v_out;
};

struct SeTrace {
    std::vector<SeStep> steps; // (v_in,t, v_out,t) for t = 0, 1, ...
    double v_in_limit = 0.0;   // last v_in produced
    bool converged = false;
    int fixed_point_count = -1; // filled in by callers that also build the chart
    /// Power the trace is expressed in: P for linear, 1 for the one-bit recursion.
    double signal_power = 1.0;
};

/// E[U^2 1(U^2 < x)] with a strict inequality.
double truncated_second_moment(const Prior& prior, double x);

/// sigma2 + v_in.
double se_outer_linear(double v_in, double sigma2);

/// One-bit outer variance for a unit-power signal, 0 <= v_in <= 1.
double se_outer_onebit(double v_in, double sigma2, int order = kDefaultHermiteOrder);

double se_outer(const Channel& channel, double v_in, int order = kDefaultHermiteOrder);

/// Iterates v_out,t = outer(v_in,t), v_in,t+1 = E[U^2 1(U^2 < 2 v_out,t / delta)]
/// from v_in,0 = P. One-bit runs use the prior rescaled to unit power.
SeTrace se_run(const Channel& channel, const Prior& prior, double delta, const SeOptions& options = {});

/// Whether a limit counts as exact reconstruction for this prior.
bool is_zero_limit(const Prior& prior, double v_in_limit);

/// Transfer curves in the coordinates x = 2 v_out / delta:
/// phi(x) = E[U^2 1(U^2 < x)], psi(x) = v_in whose outer variance maps to x.
struct ChartCurves {
    double delta = 0.0;
    std::vector<double> x;
    std::vector<double> phi;
    std::vector<double> psi; // NaN where no v_in in [0, P] maps to x
    bool zero_is_fixed_point = false;
};

/// Log-spaced grid covering every possible crossing, refined around the
/// atoms of discrete priors.
std::vector<double> default_chart_grid(const Channel& channel, const Prior& prior, double delta,
                                       std::size_t points = 4000, int order = kDefaultHermiteOrder);

ChartCurves exit_chart(const Channel& channel, const Prior& prior, double delta, std::span<const double> grid,
                       int order = kDefaultHermiteOrder);

struct FixedPointCount {
    int count = 0;
    int interior_crossings = 0;
    bool boundary_zero = false;
    bool tangency = false;
};

FixedPointCount count_fixed_points(const ChartCurves& curves);

struct ThresholdResult {
    double delta; // bracket midpoint
    double lo;
    double hi;
    int evaluations;
};

/// Smallest delta beyond which the state evolution reaches zero error.
ThresholdResult reconstruction_threshold(const Channel& channel, const Prior& prior, double delta_lo,
                                         double delta_hi, double tol_delta, const SeOptions& options = {});

/// Smallest delta beyond which the chart has a unique fixed point: the
/// supremum of the deltas in the bracket whose chart has several.
ThresholdResult weak_reconstruction_threshold(const Channel& channel, const Prior& prior, double delta_lo,
                                              double delta_hi, double tol_delta,
                                              int order = kDefaultHermiteOrder);

/// 2 (1 + sigma2 / u_min^2).
double prop1_threshold(double u_min, double sigma2);

struct Lemma1Options {
    double tolerance = 1e-12;
    int max_depth = 18;
};

struct Lemma1Point {
    double log2_n;
    double log2_k;
    double value;     // E||X - f_X(Y)||^2
    double asymptote; // E[U^2 1(U^2 < 2v)]
};

/// Expected unnormalized error of the Bayesian estimator under a Gaussian
/// observation with v_tilde = v / ln(N/k); N and k enter in log2 form.
double lemma1_expected_error(const Prior& prior, double v, double log2_n, double log2_k,
                             const Lemma1Options& options = {});

/// k = round(N^gamma) for each N = 2^log2_n.
std::vector<Lemma1Point> lemma1_curve(const Prior& prior, double v, double gamma, std::span<const double> log2_n,
                                      const Lemma1Options& options = {});

double lemma1_log2_k(double log2_n, double gamma);

} // namespace sgamp
