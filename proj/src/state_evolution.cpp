#include "sgamp/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sgamp/denoise.hpp"
#include "sgamp/errors.hpp"
#include "sgamp/gaussian.hpp"
#include "sgamp/quadrature.hpp"

namespace sgamp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTangencyTol = 1e-10;

Prior working_prior(const Channel& channel, const Prior& prior) {
    return channel.kind == ChannelKind::OneBitSign ? prior.scaled_to_unit_power() : prior;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

/// Forward samples of the one-bit outer map on a v_in grid dense near 0 and 1.
struct OnebitForwardMap {
    std::vector<double> v_in;
    std::vector<double> v_out;

    OnebitForwardMap(double sigma2, int order) {
        auto low = logspace(1e-14, 0.5, 1500);
        auto high = logspace(1e-14, 0.5, 1500);
        v_in.push_back(0.0);
        v_in.insert(v_in.end(), low.begin(), low.end());
        for (auto it = high.rbegin(); it != high.rend(); ++it)
            if (1.0 - *it > 0.5) v_in.push_back(1.0 - *it);
        v_in.push_back(1.0);
        v_out.reserve(v_in.size());
        for (double v : v_in) v_out.push_back(se_outer_onebit(v, sigma2, order));
    }

    /// v_in with outer variance `target`; NaN when outside the image of [0, 1].
    double invert(double target) const {
        if (target < v_out.front() || target > v_out.back()) return kNaN;
        const auto it = std::lower_bound(v_out.begin(), v_out.end(), target);
        const auto j = static_cast<std::size_t>(it - v_out.begin());
        if (j == 0) return v_in.front();
        const double x0 = v_out[j - 1], x1 = v_out[j];
        const double y0 = v_in[j - 1], y1 = v_in[j];
        if (x1 == x0) return y1;
        if (x0 > 0.0 && y0 > 0.0) {
            const double t = std::log(target / x0) / std::log(x1 / x0);
            return std::exp(std::log(y0) + t * std::log(y1 / y0));
        }
        return y0 + (y1 - y0) * (target - x0) / (x1 - x0);
    }
};

/// Bisection over a monotone boolean predicate (false below the threshold,
/// true above). A coarse scan rejects non-monotone predicates first.
template <class Pred>
ThresholdResult bisect_predicate(Pred&& pred, double lo, double hi, double tol, const char* name) {
    if (!(lo > 0.0) || !(hi > lo) || !(tol > 0.0))
        throw BracketError(std::string(name) + ": need 0 < delta_lo < delta_hi and tol > 0");
    int evals = 0;
    auto eval = [&](double d) {
        ++evals;
        return pred(d);
    };
    if (eval(lo)) throw BracketError(std::string(name) + ": predicate already holds at delta_lo");
    if (!eval(hi)) throw BracketError(std::string(name) + ": predicate does not hold at delta_hi");

    constexpr int kScan = 16;
    double a = lo, b = hi;
    bool seen_true = false;
    for (int i = 1; i < kScan; ++i) {
        const double d = lo + (hi - lo) * i / kScan;
        const bool v = eval(d);
        if (v && !seen_true) {
            seen_true = true;
            b = d;
        } else if (!v && seen_true) {
            throw BracketError(std::string(name) + ": predicate is not monotone in delta over the bracket");
        }
        if (!v) a = d;
    }
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        (eval(mid) ? b : a) = mid;
    }
    return {0.5 * (a + b), a, b, evals};
}

} // namespace

double truncated_second_moment(const Prior& prior, double x) {
    if (!(x >= 0.0)) throw DomainError("truncated_second_moment: threshold must be >= 0");
    if (x == 0.0) return 0.0;
    if (prior.is_gaussian()) {
        const double p = prior.gaussian_variance();
        if (std::isinf(x)) return p;
        // U^2 / P ~ chi^2_1, and E[W 1(W < c)] = Pr(chi^2_3 < c) for W ~ chi^2_1.
        return p * boost::math::gamma_p(1.5, 0.5 * x / p);
    }
    double s = 0.0;
    for (const auto& pt : prior.points()) {
        const double u2 = pt.value * pt.value;
        if (u2 < x) s += pt.probability * u2;
    }
    return s;
}

double se_outer_linear(double v_in, double sigma2) {
    if (!(v_in >= 0.0)) throw DomainError("se_outer_linear: v_in must be >= 0");
    return sigma2 + v_in;
}

double se_outer_onebit(double v_in, double sigma2, int order) {
    if (!(v_in >= 0.0)) throw DomainError("se_outer_onebit: v_in must be >= 0");
    if (v_in > 1.0 + 1e-12) throw DomainError("se_outer_onebit: requires unit signal power (v_in <= 1)");
    v_in = std::min(v_in, 1.0);
    const double s = sigma2 + v_in;
    if (s == 0.0) return 0.0;
    // With Z_t ~ N(0, 1 - v_in) and u = Z_t / sqrt(s), Q(u) f (f - Z_t/s) = phi(u) (lambda(u) - u) / s.
    // Folding phi(u) into the Z_t density leaves a Gaussian in u of variance tau2, so
    //   1 / v_out = 2 / sqrt(s) * p_G(0; 1 - v_in + s) * E[lambda(u)],  u ~ N(0, tau2).
    // The expectation is smooth in u for every v_in, including v_in -> 0.
    const double rest = 1.0 - v_in;
    const double tau = std::sqrt(rest / (rest + s));
    const auto& rule = gauss_hermite(order);
    double e = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) e += rule.weights[i] * inverse_mills(tau * rule.nodes[i]);
    const double inv = 2.0 / std::sqrt(s) * normal_pdf(0.0, rest + s) * e;
    return 1.0 / inv;
}

double se_outer(const Channel& channel, double v_in, int order) {
    if (channel.kind == ChannelKind::Linear) return se_outer_linear(v_in, channel.noise_variance);
    return se_outer_onebit(v_in, channel.noise_variance, order);
}

SeTrace se_run(const Channel& channel, const Prior& prior, double delta, const SeOptions& options) {
    if (!(delta > 0.0)) throw DomainError("se_run: delta must be positive");
    if (options.t_max < 1) throw DomainError("se_run: t_max must be >= 1");
    const Prior work = working_prior(channel, prior);
    const double power = work.second_moment();

    SeTrace trace;
    trace.signal_power = power;
    double v = power;
    for (int t = 0; t < options.t_max; ++t) {
        const double v_out = se_outer(channel, v, options.quadrature_order);
        const double next = std::min(truncated_second_moment(work, 2.0 * v_out / delta), power);
        trace.steps.push_back({v, v_out});
        const bool done = std::abs(next - v) < options.tol || (next == 0.0 && v == 0.0);
        v = next;
        if (done) {
            trace.converged = true;
            break;
        }
    }
    trace.v_in_limit = v;
    return trace;
}

bool is_zero_limit(const Prior& prior, double v_in_limit) {
    return prior.is_discrete() ? v_in_limit == 0.0 : v_in_limit < kZeroLimitThreshold;
}

std::vector<double> default_chart_grid(const Channel& channel, const Prior& prior, double delta, std::size_t points,
                                       int order) {
    if (!(delta > 0.0)) throw DomainError("default_chart_grid: delta must be positive");
    if (points < 2) throw DomainError("default_chart_grid: need at least two points");
    const Prior work = working_prior(channel, prior);
    const double power = work.second_moment();
    const double x_hi = channel.kind == ChannelKind::Linear ? 1.05 * 2.0 * (power + channel.noise_variance) / delta
                                                            : 2.0 * se_outer_onebit(1.0, channel.noise_variance, order) / delta;
    auto grid = logspace(x_hi * 1e-9, x_hi, points);
    if (work.is_discrete()) {
        // The inner curve jumps at every atom; bracket each jump tightly.
        for (const auto& pt : work.points()) {
            const double u2 = pt.value * pt.value;
            for (double f : {1.0 - 1e-9, 1.0 + 1e-9})
                if (u2 * f < x_hi) grid.push_back(u2 * f);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    return grid;
}

ChartCurves exit_chart(const Channel& channel, const Prior& prior, double delta, std::span<const double> grid,
                       int order) {
    if (!(delta > 0.0)) throw DomainError("exit_chart: delta must be positive");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
            throw DomainError("exit_chart: grid must be non-negative and strictly increasing");
    }
    const Prior work = working_prior(channel, prior);
    ChartCurves c;
    c.delta = delta;
    c.x.assign(grid.begin(), grid.end());
    c.zero_is_fixed_point = channel.noise_variance == 0.0;
    c.phi.reserve(grid.size());
    c.psi.reserve(grid.size());

    std::optional<OnebitForwardMap> forward;
    if (channel.kind == ChannelKind::OneBitSign) forward.emplace(channel.noise_variance, order);
    for (double x : grid) {
        c.phi.push_back(truncated_second_moment(work, x));
        if (channel.kind == ChannelKind::Linear)
            c.psi.push_back(0.5 * delta * x - channel.noise_variance);
        else
            c.psi.push_back(forward->invert(0.5 * delta * x));
    }
    return c;
}

FixedPointCount count_fixed_points(const ChartCurves& curves) {
    FixedPointCount r;
    int last_sign = 0;
    bool in_zero_run = false;
    for (std::size_t i = 0; i < curves.x.size(); ++i) {
        if (std::isnan(curves.psi[i])) continue;
        const double d = curves.psi[i] - curves.phi[i];
        const int sign = std::abs(d) < kTangencyTol ? 0 : (d > 0.0 ? 1 : -1);
        if (sign == 0) {
            // Leading near-zero samples belong to the boundary point at the origin.
            if (last_sign != 0) in_zero_run = true;
            continue;
        }
        if (last_sign != 0 && sign != last_sign) {
            ++r.interior_crossings;
        } else if (in_zero_run) {
            ++r.interior_crossings;
            r.tangency = true;
        }
        in_zero_run = false;
        last_sign = sign;
    }
    r.boundary_zero = curves.zero_is_fixed_point;
    r.count = r.interior_crossings + (r.boundary_zero ? 1 : 0);
    return r;
}

ThresholdResult reconstruction_threshold(const Channel& channel, const Prior& prior, double delta_lo,
                                         double delta_hi, double tol_delta, const SeOptions& options) {
    const Prior work = working_prior(channel, prior);
    auto reaches_zero = [&](double delta) { return is_zero_limit(work, se_run(channel, prior, delta, options).v_in_limit); };
    return bisect_predicate(reaches_zero, delta_lo, delta_hi, tol_delta, "reconstruction_threshold");
}

ThresholdResult weak_reconstruction_threshold(const Channel& channel, const Prior& prior, double delta_lo,
                                              double delta_hi, double tol_delta, int order) {
    if (!(delta_lo > 0.0) || !(delta_hi > delta_lo) || !(tol_delta > 0.0))
        throw BracketError("weak_reconstruction_threshold: need 0 < delta_lo < delta_hi and tol > 0");
    int evals = 0;
    auto unique = [&](double delta) {
        ++evals;
        const auto grid = default_chart_grid(channel, prior, delta, 4000, order);
        return count_fixed_points(exit_chart(channel, prior, delta, grid, order)).count == 1;
    };
    // Very small delta also has a single (high-error) fixed point, so the
    // predicate is not monotone; locate the largest delta that is not unique.
    if (!unique(delta_hi))
        throw BracketError("weak_reconstruction_threshold: fixed point is not unique at delta_hi");
    constexpr int kScan = 64;
    const auto scan = logspace(delta_lo, delta_hi, kScan);
    double a = 0.0, b = delta_hi;
    for (int i = kScan - 2; i >= 0; --i) {
        if (!unique(scan[static_cast<std::size_t>(i)])) {
            a = scan[static_cast<std::size_t>(i)];
            b = scan[static_cast<std::size_t>(i) + 1];
            break;
        }
    }
    if (a == 0.0)
        throw BracketError("weak_reconstruction_threshold: fixed point is unique over the whole bracket");
    while (b - a > tol_delta) {
        const double mid = 0.5 * (a + b);
        (unique(mid) ? b : a) = mid;
    }
    return {0.5 * (a + b), a, b, evals};
}

double prop1_threshold(double u_min, double sigma2) {
    if (!(u_min > 0.0)) throw DomainError("prop1_threshold: u_min must be positive");
    return 2.0 * (1.0 + sigma2 / (u_min * u_min));
}

// ---------------------------------------------------------------------------
// Expected error of the Bayesian estimator at finite (N, k)

namespace {

/// Integral of f over [a, b] by adaptive Gauss-Kronrod of two orders; throws
/// PrecisionError when they disagree.
template <class F>
double checked_integral(F&& f, double a, double b, const Lemma1Options& opt, double scale) {
    using boost::math::quadrature::gauss_kronrod;
    const double hi = gauss_kronrod<double, 61>::integrate(f, a, b, static_cast<unsigned>(opt.max_depth), opt.tolerance);
    const double lo = gauss_kronrod<double, 31>::integrate(f, a, b, static_cast<unsigned>(opt.max_depth), opt.tolerance);
    if (!std::isfinite(hi) || std::abs(hi - lo) > 1e-6 * std::max(std::abs(hi), scale))
        throw PrecisionError("lemma1 quadrature", "order-doubling check failed");
    return hi;
}

} // namespace

double lemma1_log2_k(double log2_n, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("lemma1: gamma must lie in [0, 1)");
    const double e = gamma * log2_n;
    if (e < 52.0) return std::log2(std::max(1.0, std::round(std::exp2(e))));
    return e;
}

double lemma1_expected_error(const Prior& prior, double v, double log2_n, double log2_k, const Lemma1Options& options) {
    if (!(v > 0.0)) throw DomainError("lemma1: v must be positive");
    const double log_ratio = (log2_n - log2_k) * std::numbers::ln2;
    const auto params = InnerDenoiserParams::from_log2(prior, log2_n, log2_k, v / log_ratio);
    const double vt = params.v_tilde;

    // Writing the N - k inactive terms through the identity
    //   (N-k) p_G(y; vt) f_A = k E_U[p_G(y - U; vt)] (1 - f_A)
    // collapses both error sources into one integral against the active-element density:
    //   E||X - f_X(Y)||^2 = E_y[ Var(U | y) + (1 - f_A(y)) E[U | y]^2 ],  y = U + N(0, vt).
    auto integrand = [&](double y) {
        const double le = log_evidence(prior, y, vt);
        if (le < -745.0) return 0.0;
        const double logit = le - log_normal_pdf(y, vt) - params.log_null_odds;
        const double m = posterior_moment(prior, y, vt, 1);
        const double var = std::max(0.0, posterior_moment(prior, y, vt, 2) - m * m);
        return std::exp(le) * (var + logistic(-logit) * m * m);
    };

    std::vector<double> breaks;
    double reach;
    if (prior.is_gaussian()) {
        reach = 40.0 * std::sqrt(prior.gaussian_variance() + vt);
        breaks.push_back(0.0);
    } else {
        double umax = 0.0;
        for (const auto& pt : prior.points()) {
            umax = std::max(umax, std::abs(pt.value));
            for (double off : {-12.0, 0.0, 12.0}) breaks.push_back(pt.value + off * std::sqrt(vt));
        }
        reach = umax + 40.0 * std::sqrt(vt);
    }
    // Locate the active/inactive transitions (logit = 0) and split there.
    auto logit_at = [&](double y) {
        return log_evidence(prior, y, vt) - log_normal_pdf(y, vt) - params.log_null_odds;
    };
    constexpr int kScan = 4000;
    double prev_y = -reach, prev_l = logit_at(prev_y);
    for (int i = 1; i <= kScan; ++i) {
        const double y = -reach + 2.0 * reach * i / kScan;
        const double l = logit_at(y);
        if ((l > 0.0) != (prev_l > 0.0)) {
            double a = prev_y, b = y;
            const bool a_pos = prev_l > 0.0;
            for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                ((logit_at(mid) > 0.0) == a_pos ? a : b) = mid;
            }
            breaks.push_back(0.5 * (a + b));
        }
        prev_y = y;
        prev_l = l;
    }
    breaks.push_back(-reach);
    breaks.push_back(reach);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double b) { return b < -reach || b > reach; }),
                 breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const double scale = 1e-12 * prior.second_moment();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) total += checked_integral(integrand, breaks[i], breaks[i + 1], options, scale);
    return total;
}

std::vector<Lemma1Point> lemma1_curve(const Prior& prior, double v, double gamma, std::span<const double> log2_n,
                                      const Lemma1Options& options) {
    std::vector<Lemma1Point> out;
    const double asymptote = truncated_second_moment(prior, 2.0 * v);
    for (double ln : log2_n) {
        const double lk = lemma1_log2_k(ln, gamma);
        if (!(ln > lk)) throw DomainError("lemma1: need k < N");
        out.push_back({ln, lk, lemma1_expected_error(prior, v, ln, lk, options), asymptote});
    }
    return out;
}

} // namespace sgamp
