#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgamp/denoise.hpp"
#include "sgamp/model.hpp"

namespace sgamp {

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kDegenerateXiOut = 1e-12;

struct GampOptions {
    int iterations = 20;
    /// Relaxation theta in (0, 1] applied to x_hat and z_hat updates; 1 disables damping.
    double damping = 1.0;
    /// Include the Onsager correction in the z update. Only disabled in regression tests.
    bool onsager = true;
};

/// Messages of one GAMP iteration. Fields describe the state after the
/// iteration that produced them; t counts completed iterations.
struct GampState {
    int t = 0;
    Vector x_hat;  // inner estimate fed to the next outer step
    Vector z_msg;  // outer input z_t
    Vector z_hat;  // outer denoiser output
    double v_in = 0.0;
    double v_out = 0.0;
    double xi_out = 0.0;
    double xi_in = 0.0;     // clamped value used downstream
    double xi_in_raw = 0.0; // value before clamping
    bool has_outer = false; // z_hat / xi_out valid (false right after init)
    int clamp_events = 0;
};

struct GampIterationRecord {
    int iter = 0;          // number of completed iterations
    double v_in = 0.0;
    double v_out = 0.0;
    double xi_out = 0.0;
    double xi_in = 0.0;
    double xi_in_raw = 0.0;
    double z_residual = 0.0; // M^-1 ||z_t - y||^2
    std::optional<double> square_error;     // ||x_hat - x||^2
    std::optional<double> z_error;          // M^-1 ||z_t - A x||^2
    std::optional<double> normalized_error; // direction error of x_hat
};

struct GampTrace {
    std::vector<GampIterationRecord> records; // records[0] is the initialisation
    Vector x_hat;
    int clamp_events = 0;
    /// Set when the run stopped early; names the failing message update.
    std::optional<std::string> failure;

    bool ok() const { return !failure.has_value(); }
    int iterations() const { return static_cast<int>(records.size()) - 1; }
};

GampState gamp_init(const ProblemDims& dims, const Prior& prior);

/// One full outer + inner sweep. Throws DegenerateDenoiserError when
/// |xi_out| collapses and NumericalError on the first non-finite message.
GampState gamp_iterate(const GampState& state, const Matrix& a, const Vector& y, const Channel& channel,
                       const Prior& prior, const ProblemDims& dims, const GampOptions& options = {});

/// Runs options.iterations sweeps, recording one row per iteration plus the
/// initial state. Numerical failures end the run and are reported through
/// GampTrace::failure with the trace recorded so far.
GampTrace gamp_run(const Matrix& a, const Vector& y, const Channel& channel, const Prior& prior,
                   const ProblemDims& dims, const GampOptions& options = {},
                   const SignalInstance* truth = nullptr);

} // namespace sgamp
