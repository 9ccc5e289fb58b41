#pragma once

#include <stdexcept>
#include <string>

namespace sgamp {

/// Argument outside the mathematical domain of an operation (v <= 0, x < 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid experiment / CLI configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during an iterative computation. Maps to exit code 3.
///
/// `where()` names the message update (or routine) that produced the first
/// non-finite or degenerate value.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// |xi_out| fell below the degeneracy floor; the GAMP iteration cannot continue.
class DegenerateDenoiserError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Quadrature failed its order-doubling self-check.
class PrecisionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Proximal step size underflow in FISTA backtracking.
class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A bisection bracket does not straddle the predicate change, or the
/// predicate is not monotone over the bracket.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sgamp
