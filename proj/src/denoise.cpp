#include "sgamp/denoise.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "sgamp/errors.hpp"
#include "sgamp/gaussian.hpp"
#include "sgamp/summation.hpp"

namespace sgamp {

namespace {

struct SlabPosterior {
    double log_evidence;
    double mean;
    double variance;
};

SlabPosterior slab_posterior(const Prior& prior, double y, double v) {
    if (prior.is_gaussian()) {
        const double s2 = prior.gaussian_variance();
        const double total = s2 + v;
        return {log_normal_pdf(y, total), s2 * y / total, s2 * v / total};
    }
    const auto pts = prior.points();
    std::array<double, Prior::kMaxPoints> logw{};
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        logw[i] = std::log(pts[i].probability) + log_normal_pdf(y - pts[i].value, v);
        top = std::max(top, logw[i]);
    }
    double z = 0.0;
    double m1 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        logw[i] = std::exp(logw[i] - top);
        z += logw[i];
        m1 += logw[i] * pts[i].value;
    }
    const double mean = m1 / z;
    double var = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = pts[i].value - mean;
        var += logw[i] * d * d;
    }
    return {top + std::log(z), mean, var / z};
}

void require_positive_variance(double v, const char* what) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + ": variance must be positive");
}

} // namespace

InnerDenoiserParams InnerDenoiserParams::make(const Prior& prior, double n, double k, double v_tilde) {
    if (!(k >= 1.0) || !(n > k)) throw DomainError("inner denoiser: need 1 <= k < N");
    require_positive_variance(v_tilde, "inner denoiser");
    return {prior, k, std::log((n - k) / k), v_tilde, prior.symmetric()};
}

InnerDenoiserParams InnerDenoiserParams::from_log2(const Prior& prior, double log2_n, double log2_k, double v_tilde) {
    const double gap = log2_n - log2_k;
    if (!(log2_k >= 0.0) || !(gap > 0.0)) throw DomainError("inner denoiser: need 1 <= k < N");
    require_positive_variance(v_tilde, "inner denoiser");
    // ln(2^gap - 1)
    const double odds = gap > 60.0 ? gap * std::numbers::ln2 + std::log1p(-std::exp2(-gap))
                                   : std::log(std::expm1(gap * std::numbers::ln2));
    return {prior, std::exp2(log2_k), odds, v_tilde, prior.symmetric()};
}

double log_evidence(const Prior& prior, double y_scaled, double v) {
    require_positive_variance(v, "log_evidence");
    return slab_posterior(prior, y_scaled, v).log_evidence;
}

double posterior_moment(const Prior& prior, double y_scaled, double v, int order) {
    require_positive_variance(v, "posterior_moment");
    const auto s = slab_posterior(prior, y_scaled, v);
    if (order == 1) return s.mean;
    if (order == 2) return s.variance + s.mean * s.mean;
    throw DomainError("posterior_moment: order must be 1 or 2");
}

double activity_probability(const InnerDenoiserParams& params, double y_scaled) {
    const auto s = slab_posterior(params.prior, y_scaled, params.v_tilde);
    return logistic(s.log_evidence - log_normal_pdf(y_scaled, params.v_tilde) - params.log_null_odds);
}

ScalarPosterior scalar_posterior(const InnerDenoiserParams& params, double y) {
    const double sqrt_k = std::sqrt(params.k);
    // Symmetric priors are evaluated on |y| so that the estimator is exactly odd.
    const bool flip = params.symmetric && y < 0.0;
    const double ys = sqrt_k * (flip ? -y : y);

    const auto slab = slab_posterior(params.prior, ys, params.v_tilde);
    const double logit = slab.log_evidence - log_normal_pdf(ys, params.v_tilde) - params.log_null_odds;
    ScalarPosterior p{};
    p.activity = logistic(logit);
    p.inactivity = logistic(-logit);
    p.slab_mean = flip ? -slab.mean : slab.mean;
    p.slab_variance = slab.variance;
    p.mean = p.activity * p.slab_mean / sqrt_k;
    p.second_moment = p.activity * (slab.variance + slab.mean * slab.mean) / params.k;
    // f_A Var_U + f_A (1 - f_A) E[U]^2, i.e. E[X^2|y] - E[X|y]^2 written without cancellation.
    const double scaled_var = p.activity * slab.variance + p.activity * p.inactivity * slab.mean * slab.mean;
    p.variance = scaled_var / params.k;
    p.derivative = scaled_var / params.v_tilde;
    return p;
}

InnerResult inner_denoise(const Prior& prior, const ProblemDims& dims, const Vector& x_t, double v_out) {
    require_positive_variance(v_out, "inner_denoise");
    const double v_tilde = v_out / (dims.delta_eff() * dims.log_ratio());
    const auto params = InnerDenoiserParams::make(prior, static_cast<double>(dims.n), static_cast<double>(dims.k), v_tilde);

    InnerResult r;
    r.x_hat.resize(x_t.size());
    CompensatedSum var_sum;
    for (Eigen::Index i = 0; i < x_t.size(); ++i) {
        const auto p = scalar_posterior(params, x_t[i]);
        r.x_hat[i] = p.mean;
        var_sum.add(p.variance);
    }
    r.xi_in = var_sum.value() / v_out;
    return r;
}

OuterEval outer_linear(double z_t, double y, double v_in, double sigma2) {
    const double s = sigma2 + v_in;
    if (!(s > 0.0)) throw DomainError("outer_linear: sigma2 + v_in must be positive");
    return {(z_t - y) / s, 1.0 / s};
}

double inverse_mills_excess(double u) {
    const double x = u / std::numbers::sqrt2;
    if (x < 5.0) return inverse_mills(u) - u;
    double g = x;
    for (int n = 60; n >= 2; --n) g = x + 0.5 * n / g;
    return 1.0 / (std::numbers::sqrt2 * g);
}

OuterEval outer_onebit(double z_t, double y, double v_in, double sigma2) {
    const double s = sigma2 + v_in;
    if (!(s > 0.0)) throw DomainError("outer_onebit: sigma2 + v_in must be positive");
    if (y != 1.0 && y != -1.0) throw DomainError("outer_onebit: observation must be -1 or +1");
    const double root = std::sqrt(s);
    // y = -1 is evaluated at w = z/sqrt(s); y = +1 at w = -z/sqrt(s) (mirror symmetry).
    const double w = -y * z_t / root;
    const double lambda = inverse_mills(w);
    return {-y * lambda / root, lambda * inverse_mills_excess(w) / s};
}

OuterEval outer_denoise(const Channel& channel, double z_t, double y, double v_in) {
    if (channel.kind == ChannelKind::Linear) return outer_linear(z_t, y, v_in, channel.noise_variance);
    return outer_onebit(z_t, y, v_in, channel.noise_variance);
}

} // namespace sgamp
