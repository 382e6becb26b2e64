/**
 * @file common.hpp
 * @brief Shared error hierarchy, numeric constants and small helpers used by
 *        every conewave module.
 *
 * Every failure mode that callers are expected to handle gets its own
 * exception type so that the CLI can map it to a diagnostic and a nonzero
 * exit code without string matching.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace conewave {

using complex_t = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// error hierarchy
// ---------------------------------------------------------------------------

/// Base class of all conewave exceptions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed configuration input (bad key, bad value, unsorted spectrum, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Evaluation of the complex gamma function at or too close to a pole.
struct PoleError : Error {
    using Error::Error;
};

/// An endpoint-singular quadrature failed to reach its error target.
struct SingularQuadratureError : Error {
    using Error::Error;
};

/// A Laplace-type tail integral diverges for the requested parameters.
struct DivergentTailError : Error {
    using Error::Error;
};

/// Triple-Bessel integral requested too close to a regime boundary.
struct RegimeBoundaryError : Error {
    using Error::Error;
};

/// Kernel evaluation requested on (or numerically at) a light-cone boundary.
struct BoundaryError : Error {
    using Error::Error;
};

/// A mode sum hit its term cap before the tail estimate met the tolerance.
struct TruncationError : Error {
    using Error::Error;
};

/// An oscillatory quadrature failed to stabilise under refinement.
struct OscillatoryQuadratureError : Error {
    using Error::Error;
};

/// Discrete grid too coarse for the requested operator assembly.
struct ResolutionError : Error {
    using Error::Error;
};

/// Power iteration failed to converge within its iteration budget.
struct PowerIterationStall : Error {
    using Error::Error;
};

/// Finite-difference derivative estimate dominated by rounding noise.
struct DerivativeNoiseError : Error {
    using Error::Error;
};

/// Distributional pairing requested where the exponent makes it ill-defined.
struct DistributionActionError : Error {
    using Error::Error;
};

/// Point outside the normal-coordinate chart of a metric model.
struct ChartError : Error {
    using Error::Error;
};

/// Cross-section kind/parameter combination that the library does not build.
struct UnsupportedCrossSection : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// value-with-error carriers
// ---------------------------------------------------------------------------

/// Real scalar result together with a (conservative) absolute error estimate.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Complex scalar result together with an absolute error estimate.
struct ComplexEstimate {
    complex_t value{0.0, 0.0};
    double error = 0.0;
};

/// Non-fatal warnings accumulated during a computation (e.g. a mode sum that
/// reached its cap but still met a relaxed tolerance).
struct WarningLog {
    std::vector<std::string> messages;
    void add(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
};

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(const complex_t& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// |a-b| measured relative to max(|a|,|b|,floor).
inline double rel_diff(double a, double b, double floor_ = 1e-300) {
    const double scale = std::max({std::abs(a), std::abs(b), floor_});
    return std::abs(a - b) / scale;
}
inline double rel_diff(const complex_t& a, const complex_t& b,
                       double floor_ = 1e-300) {
    const double scale = std::max({std::abs(a), std::abs(b), floor_});
    return std::abs(a - b) / scale;
}

/// Exact-at-integer cos(pi*z) / sin(pi*z) for complex z.  Splitting z into
/// its nearest-integer part keeps the half-integer zeros of cos exact, which
/// the damped exterior mode sums rely on.
inline complex_t cos_pi(const complex_t& z) {
    if (z.imag() == 0.0) {
        const double x = z.real();
        const double r = x - std::round(x);  // in [-1/2, 1/2]
        const double base = (std::abs(r) == 0.5) ? 0.0 : std::cos(pi * r);
        const long long k = static_cast<long long>(std::llround(x));
        return {(k % 2 == 0) ? base : -base, 0.0};
    }
    return std::cos(pi * z);
}
inline complex_t sin_pi(const complex_t& z) {
    if (z.imag() == 0.0) {
        const double x = z.real();
        const double r = x - std::round(x);
        const double base =
            (std::abs(r) == 0.5) ? (r > 0 ? 1.0 : -1.0) : std::sin(pi * r);
        const long long k = static_cast<long long>(std::llround(x));
        return {(k % 2 == 0) ? base : -base, 0.0};
    }
    return std::sin(pi * z);
}

/// Principal power z^a for complex z, a with the branch cut on the negative
/// real axis; 0^a = 0 for Re a > 0.
inline complex_t cpow(const complex_t& z, const complex_t& a) {
    if (z == complex_t{0.0, 0.0}) {
        if (a.real() > 0.0) return {0.0, 0.0};
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    return std::exp(a * std::log(z));
}

/// Real-base power with complex exponent (base must be positive).
inline complex_t rpow(double x, const complex_t& a) {
    return std::exp(a * std::log(x));
}

}  // namespace conewave
