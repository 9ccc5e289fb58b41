#include <doctest.h>

#include <cmath>
#include <limits>

#include "sgamp/baselines.hpp"
#include "sgamp/errors.hpp"
#include "sgamp/metrics.hpp"

using namespace sgamp;

namespace {

struct Instance {
    Matrix a;
    Vector x;
    Vector y;
    std::vector<std::size_t> support;
};

Instance linear_instance(std::size_t n, std::size_t k, std::size_t m, double sigma2, std::uint64_t seed) {
    Rng rng(seed);
    ProblemDims d{n, k, m, 1.0};
    const auto s = sample_signal(d, Prior::gaussian(1.0), rng);
    Instance in{sample_matrix(d, rng), s.x, {}, s.support};
    in.y = in.a * in.x;
    for (Eigen::Index i = 0; i < in.y.size(); ++i) in.y[i] += std::sqrt(sigma2) * rng.normal();
    return in;
}

Instance sign_instance(std::size_t n, std::size_t k, std::size_t m, std::uint64_t seed) {
    Instance in = linear_instance(n, k, m, 0.0, seed);
    for (Eigen::Index i = 0; i < in.y.size(); ++i) in.y[i] = in.y[i] >= 0.0 ? 1.0 : -1.0;
    return in;
}

/// Least-squares residual of the best support over all pairs.
std::vector<std::size_t> best_pair(const Matrix& a, const Vector& y) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> arg;
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            Matrix sub(a.rows(), 2);
            sub.col(0) = a.col(i);
            sub.col(1) = a.col(j);
            const Vector c = sub.colPivHouseholderQr().solve(y);
            const double r = (y - sub * c).squaredNorm();
            if (r < best) {
                best = r;
                arg = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
            }
        }
    return arg;
}

} // namespace

TEST_CASE("omp recovers a single atom exactly") {
    for (std::size_t m : {10, 20, 40}) {
        auto in = linear_instance(20, 1, m, 0.0, m);
        const auto r = omp(in.a, in.y, 1);
        CHECK((r.x_hat - in.x).norm() <= 1e-12 * in.x.norm());
        CHECK(r.residual_norms.back() <= 1e-12 * in.y.norm());
    }
}

TEST_CASE("omp stops before selecting anything when y = 0") {
    auto in = linear_instance(20, 2, 10, 0.0, 1);
    const auto r = omp(in.a, Vector::Zero(10), 2);
    CHECK(r.support.empty());
    CHECK(r.x_hat.isZero(0.0));
}

TEST_CASE("omp agrees with exhaustive support search") {
    int matches = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto in = linear_instance(32, 2, 16, 1e-6, 1000 + seed);
        auto chosen = omp(in.a, in.y, 2).support;
        std::sort(chosen.begin(), chosen.end());
        matches += chosen == best_pair(in.a, in.y);
    }
    CHECK(matches >= 18);
}

TEST_CASE("omp residual is non-increasing and rank deficiency is flagged") {
    auto in = linear_instance(40, 5, 20, 1e-3, 5);
    const auto r = omp(in.a, in.y, 5);
    for (std::size_t i = 1; i < r.residual_norms.size(); ++i) CHECK(r.residual_norms[i] <= r.residual_norms[i - 1] * (1 + 1e-12));
    CHECK_FALSE(r.rank_deficient);

    Matrix dup(2, 3);
    dup << 1, 1, 0, //
        0, 0, 1;
    Vector y(2);
    y << 1.0, 0.0;
    const auto d = omp(dup, y, 2);
    CHECK(d.residual_norms.back() < 1e-12);
    CHECK_THROWS_AS(omp(dup, y, 3), DomainError);
}

TEST_CASE("fista returns zero above lambda_max") {
    auto in = linear_instance(50, 3, 25, 1e-2, 2);
    FistaConfig c;
    c.lambda = lambda_max(in.a, in.y);
    c.max_iters = 200;
    CHECK(fista(in.a, in.y, c).x_hat.isZero(0.0));
    c.lambda *= 3.0;
    CHECK(fista(in.a, in.y, c).x_hat.isZero(0.0));
}

TEST_CASE("fista matches the scalar closed form") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix a(7, 1);
        Vector y(7);
        for (int i = 0; i < 7; ++i) {
            a(i, 0) = rng.normal();
            y[i] = 0.8 * a(i, 0) + 0.3 * rng.normal();
        }
        const double lam = 0.05 + 0.1 * rep;
        const double m = 7.0;
        const double c = a.col(0).dot(y) / m, q = a.col(0).squaredNorm() / m;
        const double closed = (c > lam ? c - lam : c < -lam ? c + lam : 0.0) / q;
        FistaConfig cfg;
        cfg.lambda = lam;
        cfg.max_iters = 500;
        CHECK(std::abs(fista(a, y, cfg).x_hat[0] - closed) <= 1e-8);
    }
}

TEST_CASE("fista objective and optimality") {
    auto in = linear_instance(256, 8, 80, 1e-3, 8);
    FistaConfig cfg;
    cfg.lambda = lambda_default(1e-3, 80, 256);
    cfg.max_iters = 3000;
    cfg.tolerance = 1e-12;
    const auto r = fista(in.a, in.y, cfg);
    for (std::size_t t = 5; t < r.objective.size(); ++t) CHECK(r.objective[t] <= r.objective[t - 1]);
    for (std::size_t t = 20; t < r.objective.size(); t += 10) CHECK(r.objective[t] <= r.objective[t - 10]);
    CHECK(r.objective.back() <= lasso_objective(in.a, in.y, Vector::Zero(256), cfg.lambda));
    REQUIRE(r.converged);
    const Vector g = in.a.transpose() * (in.a * r.x_hat - in.y) / 80.0;
    CHECK(g.lpNorm<Eigen::Infinity>() <= cfg.lambda * (1 + 1e-3));
    CHECK(r.objective.back() == doctest::Approx(lasso_objective(in.a, in.y, r.x_hat, cfg.lambda)).epsilon(1e-12));
}

TEST_CASE("fista reports step underflow") {
    Matrix a = Matrix::Ones(3, 2);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    FistaConfig cfg;
    cfg.lambda = 0.1;
    cfg.initial_step = 1.0;
    CHECK_THROWS_AS(fista(a, Vector::Ones(3), cfg), ConvergenceError);
    cfg.backtracking = 1.0;
    CHECK_THROWS_AS(fista(a, Vector::Ones(3), cfg), DomainError);
}

TEST_CASE("default lambda") {
    CHECK(lambda_default(1e-4, 100, std::exp(10.0)) == doctest::Approx(std::sqrt(8e-6)).epsilon(1e-14));
    CHECK(lambda_default(1e-4, 400, 1000) == doctest::Approx(0.5 * lambda_default(1e-4, 100, 1000)).epsilon(1e-14));
    CHECK(lambda_default(4e-4, 100, 1000) == doctest::Approx(2.0 * lambda_default(1e-4, 100, 1000)).epsilon(1e-14));
    CHECK_THROWS_AS(lambda_default(0.0, 100, 1000), DomainError);
}

TEST_CASE("hard threshold") {
    Vector v(6);
    v << 0.5, -2.0, 0.5, 1.0, -0.5, 0.1;
    const Vector h = hard_threshold(v, 3);
    Vector expect(6);
    expect << 0.5, -2.0, 0.0, 1.0, 0.0, 0.0;
    CHECK(h == expect);
    CHECK(hard_threshold(h, 3) == h);
    Rng rng(2);
    Vector r(50);
    for (auto& e : r) e = rng.normal();
    CHECK(hard_threshold(hard_threshold(r, 7), 7) == hard_threshold(r, 7));
}

TEST_CASE("biht output contract and consistency") {
    auto in = sign_instance(64, 4, 400, 11);
    BihtConfig cfg;
    cfg.k = 4;
    cfg.max_iters = 50;
    const auto r = biht(in.a, in.y, cfg);
    int nnz = 0;
    for (Eigen::Index i = 0; i < r.x_hat.size(); ++i) nnz += r.x_hat[i] != 0.0;
    CHECK(nnz <= 4);
    CHECK(r.x_hat.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(metric_normalized(r.x_hat, in.x).value < 0.1);

    // Measurements generated from a k-sparse unit vector that the initial iterate already matches.
    Matrix a = Matrix::Identity(3, 3);
    Vector y(3);
    y << 1.0, -1.0, 1.0;
    BihtConfig c3;
    c3.k = 3;
    c3.max_iters = 5;
    const auto f = biht(a, y, c3);
    CHECK(f.consistent_at == 0);
    CHECK(f.x_hat.isApprox(y / std::sqrt(3.0)));
    CHECK_THROWS_AS(biht(a, Vector::Zero(3), c3), DomainError);
}

TEST_CASE("glasso is fista on sign measurements") {
    auto in = sign_instance(64, 4, 400, 12);
    FistaConfig cfg;
    cfg.lambda = 0.05;
    cfg.max_iters = 20;
    CHECK(glasso(in.a, in.y, cfg).x_hat == fista(in.a, in.y, cfg).x_hat);
    cfg.lambda = lambda_max(in.a, in.y);
    CHECK(glasso(in.a, in.y, cfg).x_hat.isZero(0.0));

    const double top = lambda_max(in.a, in.y);
    double best = 4.0;
    for (int j = 0; j < 8; ++j) {
        cfg.lambda = top * std::pow(10.0, -0.25 * (j + 1));
        cfg.max_iters = 200;
        best = std::min(best, metric_normalized(glasso(in.a, in.y, cfg).x_hat, in.x).value);
    }
    CHECK(best < 0.3);
}
