#include "sgamp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sgamp/errors.hpp"
#include "sgamp/metrics.hpp"

namespace sgamp {

namespace {

Matrix gather_columns(const Matrix& a, const std::vector<std::size_t>& cols) {
    Matrix out(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(static_cast<Eigen::Index>(cols[j]));
    return out;
}

double soft(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

Vector soft_threshold(const Vector& v, double t) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft(v[i], t);
    return out;
}

/// Largest squared singular value of A by power iteration on A^T A.
double spectral_norm_sq(const Matrix& a) {
    Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double est = 0.0;
    for (int i = 0; i < 50; ++i) {
        Vector w = a.transpose() * (a * v);
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / nrm;
        if (std::abs(next - est) <= 1e-6 * next) return next;
        est = next;
    }
    return est;
}

void check_sign_vector(const Vector& y, const char* who) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] != 1.0 && y[i] != -1.0) throw DomainError(std::string(who) + ": measurements must be +1 or -1");
}

} // namespace

OmpResult omp(const Matrix& a, const Vector& y, std::size_t k) {
    const auto m = static_cast<std::size_t>(a.rows());
    const auto n = static_cast<std::size_t>(a.cols());
    if (y.size() != a.rows()) throw DomainError("omp: y length does not match A");
    if (k > std::min(m, n)) throw DomainError("omp: k must not exceed min(M, N)");

    OmpResult r;
    r.x_hat = Vector::Zero(a.cols());
    Vector residual = y;
    const double stop = 1e-12 * y.norm();
    r.residual_norms.push_back(residual.norm());
    std::vector<char> chosen(n, 0);
    Vector coef;
    for (std::size_t round = 0; round < k; ++round) {
        if (residual.norm() <= stop) break;
        const Vector corr = a.transpose() * residual;
        std::size_t best = n;
        double best_val = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = std::abs(corr[static_cast<Eigen::Index>(j)]);
            if (!chosen[j] && c > best_val) {
                best_val = c;
                best = j;
            }
        }
        chosen[best] = 1;
        r.support.push_back(best);
        const Matrix sub = gather_columns(a, r.support);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
        if (cod.rank() < static_cast<Eigen::Index>(r.support.size())) r.rank_deficient = true;
        coef = cod.solve(y);
        residual = y - sub * coef;
        r.residual_norms.push_back(residual.norm());
    }
    for (std::size_t j = 0; j < r.support.size(); ++j) r.x_hat[static_cast<Eigen::Index>(r.support[j])] = coef[static_cast<Eigen::Index>(j)];
    return r;
}

double lasso_objective(const Matrix& a, const Vector& y, const Vector& x, double lambda) {
    const double m = static_cast<double>(a.rows());
    return 0.5 / m * (y - a * x).squaredNorm() + lambda * x.lpNorm<1>();
}

double lambda_default(double sigma2, double m, double n) {
    if (!(sigma2 > 0.0)) throw DomainError("lambda_default: sigma2 must be positive");
    if (!(m >= 1.0) || !(n > 1.0)) throw DomainError("lambda_default: need M >= 1 and N > 1");
    return std::sqrt(0.8 * sigma2 * std::log(n) / m);
}

double lambda_max(const Matrix& a, const Vector& y) {
    return (a.transpose() * y).lpNorm<Eigen::Infinity>() / static_cast<double>(a.rows());
}

FistaResult fista(const Matrix& a, const Vector& y, const FistaConfig& cfg, const IterateObserver& observe) {
    if (!(cfg.lambda > 0.0)) throw DomainError("fista: lambda must be positive");
    if (!(cfg.backtracking > 0.0 && cfg.backtracking < 1.0)) throw DomainError("fista: backtracking factor must lie in (0, 1)");
    if (cfg.max_iters < 1) throw DomainError("fista: max_iters must be >= 1");
    if (y.size() != a.rows()) throw DomainError("fista: y length does not match A");

    const double m = static_cast<double>(a.rows());
    const double lam = cfg.lambda;
    double step = cfg.initial_step;
    if (!(step > 0.0)) {
        const double l = spectral_norm_sq(a) / m;
        step = l > 0.0 ? 1.0 / l : 1.0;
    }

    FistaResult r;
    Vector x = Vector::Zero(a.cols());
    Vector ax = Vector::Zero(a.rows());
    Vector x_prev = x, ax_prev = ax;
    double t_mom = 1.0;
    double obj = 0.5 / m * y.squaredNorm();

    // Proximal step from point v (with A v = av); returns objective at the new point.
    auto prox_step = [&](const Vector& v, const Vector& av, Vector& out, Vector& aout) {
        const Vector resid = av - y;
        const double fv = 0.5 / m * resid.squaredNorm();
        const Vector grad = a.transpose() * resid / m;
        for (;;) {
            out = soft_threshold(v - step * grad, step * lam);
            aout = a * out;
            const Vector d = out - v;
            const double fout = 0.5 / m * (aout - y).squaredNorm();
            // Slack absorbs rounding in fout - fv once d is at the noise level of the objective.
            const double slack = 1e-13 * fv + 1e-300;
            if (fout <= fv + grad.dot(d) + 0.5 / step * d.squaredNorm() + slack) return fout + lam * out.lpNorm<1>();
            step *= cfg.backtracking;
            if (step < 1e-30) throw ConvergenceError("fista backtracking", "step size underflow");
        }
    };

    Vector x_new, ax_new;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const double beta = (t_mom - 1.0) / (0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom)));
        const Vector v = x + beta * (x - x_prev);
        const Vector av = ax + beta * (ax - ax_prev);
        double new_obj = prox_step(v, av, x_new, ax_new);
        bool restart = false;
        if (new_obj > obj) {
            // Momentum overshot: fall back to a plain proximal step from x.
            new_obj = prox_step(x, ax, x_new, ax_new);
            restart = true;
            if (new_obj > obj) {
                // Rounding at convergence; keep the current iterate.
                x_new = x;
                ax_new = ax;
                new_obj = obj;
            }
        } else if (cfg.restart && (v - x_new).dot(x_new - x) > 0.0) {
            restart = true;
        }
        if (restart) {
            t_mom = 1.0;
            ++r.restarts;
        } else {
            t_mom = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        }
        const double change = (x_new - x).norm();
        x_prev = std::move(x);
        ax_prev = std::move(ax);
        x = x_new;
        ax = ax_new;
        if (restart) {
            x_prev = x;
            ax_prev = ax;
        }
        obj = new_obj;
        r.objective.push_back(new_obj);
        r.iterations = it;
        if (observe) observe(it, x);
        if (cfg.tolerance > 0.0 && change <= cfg.tolerance * std::max(1.0, x.norm())) {
            r.converged = true;
            break;
        }
    }
    r.x_hat = std::move(x);
    r.step = step;
    return r;
}

Vector hard_threshold(const Vector& v, std::size_t k) {
    Vector out = Vector::Zero(v.size());
    for (std::size_t i : top_k_indices(v, std::min<std::size_t>(k, static_cast<std::size_t>(v.size()))))
        out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(i)];
    return out;
}

BihtResult biht(const Matrix& a, const Vector& y, const BihtConfig& cfg, const IterateObserver& observe) {
    if (cfg.k < 1) throw DomainError("biht: k must be >= 1");
    if (!(cfg.step > 0.0)) throw DomainError("biht: step must be positive");
    if (y.size() != a.rows()) throw DomainError("biht: y length does not match A");
    check_sign_vector(y, "biht");
    const double m = static_cast<double>(a.rows());

    auto normalize = [](Vector& v) {
        const double nrm = v.norm();
        if (nrm > 0.0) v /= nrm;
    };
    BihtResult r;
    Vector x = hard_threshold(a.transpose() * y, cfg.k);
    normalize(x);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const Vector ax = a * x;
        Vector mismatch(ax.size());
        bool consistent = true;
        for (Eigen::Index i = 0; i < ax.size(); ++i) {
            mismatch[i] = y[i] - (ax[i] >= 0.0 ? 1.0 : -1.0);
            consistent = consistent && mismatch[i] == 0.0;
        }
        if (consistent && r.consistent_at < 0) r.consistent_at = it - 1;
        if (!consistent) {
            x = hard_threshold(x + (cfg.step / m) * (a.transpose() * mismatch), cfg.k);
            if (cfg.normalize_each_iteration) normalize(x);
        }
        r.iterations = it;
        if (observe) observe(it, x);
    }
    normalize(x);
    r.x_hat = std::move(x);
    return r;
}

FistaResult glasso(const Matrix& a, const Vector& y, const FistaConfig& cfg, const IterateObserver& observe) {
    check_sign_vector(y, "glasso");
    return fista(a, y, cfg, observe);
}

} // namespace sgamp
