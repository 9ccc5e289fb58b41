#include "sgamp/gaussian.hpp"

#include <algorithm>
#include <limits>

namespace sgamp {

double erfcx(double x) {
    if (x < 0.0) {
        if (x < -26.5) return std::numeric_limits<double>::infinity();
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x < 5.0) return std::exp(x * x) * std::erfc(x);
    // Continued fraction 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
    // evaluated bottom-up; 60 levels reach full precision for x >= 5.
    double f = x;
    for (int n = 60; n >= 1; --n) f = x + 0.5 * n / f;
    return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

double inverse_mills(double u) {
    if (u < 0.0) return normal_pdf(u, 1.0) / q_function(u);
    return std::sqrt(2.0 / std::numbers::pi) / erfcx(u / std::numbers::sqrt2);
}

double log_sum_exp(std::span<const double> terms) {
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

} // namespace sgamp
