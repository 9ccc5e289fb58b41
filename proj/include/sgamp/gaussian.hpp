#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace sgamp {

inline constexpr double kLog2Pi = 1.8378770664093454836; // ln(2 pi)

/// log of the N(0, var) density at x.
inline double log_normal_pdf(double x, double var) {
    return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * x * x / var;
}

inline double normal_pdf(double x, double var) {
    return std::exp(log_normal_pdf(x, var));
}

/// Standard Gaussian upper tail Pr(Z > x).
inline double q_function(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Scaled complementary error function exp(x^2) erfc(x).
///
/// Finite for every x >= -26.5; returns +inf below that.
double erfcx(double x);

/// Inverse Mills ratio phi(u) / Q(u) of the standard Gaussian.
///
/// Never overflows: behaves like u + 1/u for large u and tends to 0 for u -> -inf.
double inverse_mills(double u);

/// log(sum_i exp(terms[i])), stable for arbitrarily negative entries.
double log_sum_exp(std::span<const double> terms);

/// Logistic function 1 / (1 + exp(-t)) without overflow.
inline double logistic(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace sgamp
