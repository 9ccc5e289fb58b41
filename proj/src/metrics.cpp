#include "sgamp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sgamp/errors.hpp"
#include "sgamp/summation.hpp"

namespace sgamp {

double metric_unnormalized(const Vector& x_hat, const Vector& x) {
    if (x_hat.size() != x.size()) throw std::invalid_argument("metric_unnormalized: length mismatch");
    CompensatedSum s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x_hat[i] - x[i];
        s.add(d * d);
    }
    return s.value();
}

NormalizedError metric_normalized(const Vector& x_hat, const Vector& x) {
    if (x_hat.size() != x.size()) throw std::invalid_argument("metric_normalized: length mismatch");
    const double nx = x.norm();
    if (!(nx > 0.0)) throw DomainError("metric_normalized: reference vector is zero");
    const double nh = x_hat.norm();
    if (!(nh > 0.0)) return {2.0, true};
    CompensatedSum s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x[i] / nx - x_hat[i] / nh;
        s.add(d * d);
    }
    return {std::clamp(s.value(), 0.0, 4.0), false};
}

std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k) {
    const auto n = static_cast<std::size_t>(v.size());
    k = std::min(k, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto larger = [&](std::size_t a, std::size_t b) {
        const double fa = std::abs(v[static_cast<Eigen::Index>(a)]);
        const double fb = std::abs(v[static_cast<Eigen::Index>(b)]);
        return fa != fb ? fa > fb : a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), larger);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

bool support_recovered(const Vector& x_hat, const std::vector<std::size_t>& support) {
    auto truth = support;
    std::sort(truth.begin(), truth.end());
    return top_k_indices(x_hat, truth.size()) == truth;
}

} // namespace sgamp
