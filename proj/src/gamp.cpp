#include "sgamp/gamp.hpp"

#include <cmath>

#include "sgamp/errors.hpp"
#include "sgamp/metrics.hpp"
#include "sgamp/summation.hpp"

namespace sgamp {

namespace {

void check_finite(const Vector& v, const char* where) {
    if (!v.allFinite()) throw NumericalError(where, "non-finite entry");
}

void check_finite(double v, const char* where) {
    if (!std::isfinite(v)) throw NumericalError(where, "non-finite value");
}

double floor_variance(double v, int& events) {
    if (v < kVarianceFloor) {
        ++events;
        return kVarianceFloor;
    }
    return v;
}

double mean_square_distance(const Vector& a, const Vector& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

} // namespace

GampState gamp_init(const ProblemDims& dims, const Prior& prior) {
    GampState s;
    s.t = 0;
    s.x_hat = Vector::Zero(static_cast<Eigen::Index>(dims.n));
    s.z_msg = Vector::Zero(static_cast<Eigen::Index>(dims.m));
    s.v_in = prior.second_moment();
    return s;
}

GampState gamp_iterate(const GampState& state, const Matrix& a, const Vector& y, const Channel& channel,
                       const Prior& prior, const ProblemDims& dims, const GampOptions& options) {
    if (a.rows() != static_cast<Eigen::Index>(dims.m) || a.cols() != static_cast<Eigen::Index>(dims.n))
        throw std::invalid_argument("gamp_iterate: matrix shape does not match dims");
    if (y.size() != a.rows()) throw std::invalid_argument("gamp_iterate: measurement length mismatch");

    const double m = static_cast<double>(dims.m);
    const double theta = options.damping;
    GampState next;
    next.t = state.t + 1;
    next.clamp_events = state.clamp_events;

    // Outer module.
    next.z_msg.noalias() = a * state.x_hat;
    if (state.has_outer && options.onsager) next.z_msg += (state.xi_in / state.xi_out) * state.z_hat;
    check_finite(next.z_msg, "z_t update");

    next.v_in = state.has_outer ? state.v_out * state.xi_in : state.v_in;
    check_finite(next.v_in, "v_in update");
    next.v_in = floor_variance(next.v_in, next.clamp_events);

    next.z_hat.resize(y.size());
    CompensatedSum dz_sum;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const auto e = outer_denoise(channel, next.z_msg[i], y[i], next.v_in);
        next.z_hat[i] = e.value;
        dz_sum.add(e.dz);
    }
    if (state.has_outer && theta < 1.0) next.z_hat = theta * next.z_hat + (1.0 - theta) * state.z_hat;
    check_finite(next.z_hat, "z_hat outer denoiser");

    next.xi_out = dz_sum.value() / m;
    check_finite(next.xi_out, "xi_out");
    if (std::abs(next.xi_out) < kDegenerateXiOut)
        throw DegenerateDenoiserError("xi_out", "outer denoiser derivative average collapsed to zero");
    next.has_outer = true;

    // Inner module.
    Vector x_t = state.x_hat;
    x_t.noalias() -= (1.0 / (m * next.xi_out)) * (a.transpose() * next.z_hat);
    check_finite(x_t, "x_t update");

    next.v_out = next.z_hat.squaredNorm() / (m * next.xi_out * next.xi_out);
    check_finite(next.v_out, "v_out");
    next.v_out = floor_variance(next.v_out, next.clamp_events);

    auto inner = inner_denoise(prior, dims, x_t, next.v_out);
    next.x_hat = theta < 1.0 ? Vector(theta * inner.x_hat + (1.0 - theta) * state.x_hat) : std::move(inner.x_hat);
    check_finite(next.x_hat, "x_hat inner denoiser");
    check_finite(inner.xi_in, "xi_in");
    next.xi_in_raw = inner.xi_in;
    next.xi_in = floor_variance(inner.xi_in, next.clamp_events);
    return next;
}

GampTrace gamp_run(const Matrix& a, const Vector& y, const Channel& channel, const Prior& prior,
                   const ProblemDims& dims, const GampOptions& options, const SignalInstance* truth) {
    if (options.iterations < 1) throw DomainError("gamp_run: need at least one iteration");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) throw DomainError("gamp_run: damping must lie in (0, 1]");

    GampTrace trace;
    Vector z_true;
    if (truth) z_true = a * truth->x;

    auto state = gamp_init(dims, prior);
    auto record = [&](const GampState& s) {
        GampIterationRecord r;
        r.iter = s.t;
        r.v_in = s.v_in;
        r.v_out = s.v_out;
        r.xi_out = s.xi_out;
        r.xi_in = s.xi_in;
        r.xi_in_raw = s.xi_in_raw;
        r.z_residual = mean_square_distance(s.z_msg, y);
        if (truth) {
            r.square_error = metric_unnormalized(s.x_hat, truth->x);
            r.z_error = mean_square_distance(s.z_msg, z_true);
            r.normalized_error = metric_normalized(s.x_hat, truth->x).value;
        }
        trace.records.push_back(r);
    };

    record(state);
    for (int it = 0; it < options.iterations; ++it) {
        try {
            state = gamp_iterate(state, a, y, channel, prior, dims, options);
        } catch (const NumericalError& e) {
            trace.failure = e.what();
            break;
        }
        record(state);
    }
    trace.x_hat = state.x_hat;
    trace.clamp_events = state.clamp_events;
    return trace;
}

} // namespace sgamp
