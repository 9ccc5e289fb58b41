#pragma once

#include <cstddef>
#include <vector>

#include "sgamp/model.hpp"

namespace sgamp {

/// ||x_hat - x||^2.
double metric_unnormalized(const Vector& x_hat, const Vector& x);

struct NormalizedError {
    double value;
    bool zero_estimate; // x_hat == 0; value is then the convention 2
};

/// || x/||x|| - x_hat/||x_hat|| ||^2 in [0, 4].
NormalizedError metric_normalized(const Vector& x_hat, const Vector& x);

/// True when the k largest-magnitude entries of x_hat (ties to the lowest
/// index) are exactly the true support.
bool support_recovered(const Vector& x_hat, const std::vector<std::size_t>& support);

/// Indices of the k largest |v_i|, ties broken by lowest index, sorted ascending.
std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k);

} // namespace sgamp
