#pragma once

#include <vector>

namespace sgamp {

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1): sum_i weights[i] f(nodes[i]).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights; // sum to 1
};

/// Probabilists' Gauss-Hermite rule of the given order (Golub-Welsch).
/// Rules are cached; the returned reference stays valid for the program lifetime.
const QuadratureRule& gauss_hermite(int order);

} // namespace sgamp
