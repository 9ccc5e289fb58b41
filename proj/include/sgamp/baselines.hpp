#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sgamp/model.hpp"

namespace sgamp {

struct OmpResult {
    Vector x_hat;
    std::vector<std::size_t> support; // selection order
    std::vector<double> residual_norms; // ||r|| before the first round and after each round
    bool rank_deficient = false;
};

/// Orthogonal matching pursuit with a least-squares refit every round.
OmpResult omp(const Matrix& a, const Vector& y, std::size_t k);

/// Called with (iteration, iterate) after every completed iteration.
using IterateObserver = std::function<void(int, const Vector&)>;

struct FistaConfig {
    double lambda = 0.0;
    int max_iters = 1000;
    double backtracking = 0.5; // step shrink factor in (0, 1)
    double initial_step = 0.0; // 0 selects M / ||A||_F^2
    bool restart = true;
    /// Stop when the relative iterate change falls below this; 0 runs max_iters.
    double tolerance = 0.0;
};

struct FistaResult {
    Vector x_hat;
    std::vector<double> objective; // one entry per iteration, after the update
    int iterations = 0;
    int restarts = 0;
    double step = 0.0;
    bool converged = false;
};

/// Minimises (1/2M)||y - Ax||^2 + lambda ||x||_1.
FistaResult fista(const Matrix& a, const Vector& y, const FistaConfig& cfg, const IterateObserver& observe = {});

double lasso_objective(const Matrix& a, const Vector& y, const Vector& x, double lambda);

/// sqrt(0.8 sigma2 ln(N) / M).
double lambda_default(double sigma2, double m, double n);

/// ||A^T y||_inf / M: smallest lambda with the all-zero solution.
double lambda_max(const Matrix& a, const Vector& y);

struct BihtConfig {
    std::size_t k = 1;
    int max_iters = 20;
    double step = 1.0;
    bool normalize_each_iteration = true;
};

struct BihtResult {
    Vector x_hat; // unit norm, or zero
    int iterations = 0;
    int consistent_at = -1; // first iteration with sign(A x) = y, -1 if never
};

BihtResult biht(const Matrix& a, const Vector& y, const BihtConfig& cfg, const IterateObserver& observe = {});

/// Keeps the k largest-magnitude entries; ties go to the lowest index.
Vector hard_threshold(const Vector& v, std::size_t k);

/// Lasso on the sign measurements, treated as linear observations.
FistaResult glasso(const Matrix& a, const Vector& y, const FistaConfig& cfg, const IterateObserver& observe = {});

} // namespace sgamp
