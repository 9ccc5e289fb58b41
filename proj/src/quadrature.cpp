#include "sgamp/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "sgamp/errors.hpp"

namespace sgamp {

namespace {

QuadratureRule build_rule(int order) {
    // Jacobi matrix of the monic probabilists' Hermite recurrence.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        jac(i, i - 1) = std::sqrt(static_cast<double>(i));
        jac(i - 1, i) = jac(i, i - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        rule.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
        rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
        total += v0 * v0;
    }
    for (auto& w : rule.weights) w /= total;
    // Symmetrise: the exact rule is even.
    for (int i = 0, j = order - 1; i < j; ++i, --j) {
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
        const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
        const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
        rule.nodes[a] = -x;
        rule.nodes[b] = x;
        rule.weights[a] = rule.weights[b] = w;
    }
    if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    return rule;
}

} // namespace

const QuadratureRule& gauss_hermite(int order) {
    if (order < 1 || order > 1000) throw DomainError("gauss_hermite: order must lie in [1, 1000]");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<QuadratureRule>(build_rule(order));
    return *slot;
}

} // namespace sgamp
