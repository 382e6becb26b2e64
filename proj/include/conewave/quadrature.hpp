/**
 * @file quadrature.hpp
 * @brief Composite Gauss-Legendre quadrature with endpoint-singularity and
 *        oscillation-aware panel generation.
 *
 * The kernels integrated in this project combine three difficulties: an
 * algebraic singularity at one endpoint, oscillation with a known rate, and
 * exponential tails.  Rather than one adaptive black box, the helpers here
 * build explicit panel lists driven by those known rates and then apply a
 * fixed 20-point Gauss-Legendre rule per panel; a doubled-resolution pass
 * supplies the error estimate.  This keeps every evaluation deterministic.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "conewave/common.hpp"

namespace conewave::quad {

/// Positive abscissas of the 20-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 10> gl20_x = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949};

/// Weights paired with gl20_x.
inline constexpr std::array<double, 10> gl20_w = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
    0.0176140071391521};

/// 20-point Gauss-Legendre rule over a single interval [a,b].
template <class F>
auto gl20(F&& f, double a, double b) -> decltype(f(a)) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    decltype(f(a)) acc{};
    for (std::size_t i = 0; i < gl20_x.size(); ++i) {
        acc += gl20_w[i] * (f(mid + half * gl20_x[i]) + f(mid - half * gl20_x[i]));
    }
    return acc * half;
}

/// Composite rule over consecutive panels given by breakpoints.
template <class F>
auto composite(F&& f, const std::vector<double>& pts) -> decltype(f(0.0)) {
    decltype(f(0.0)) acc{};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        acc += gl20(f, pts[i], pts[i + 1]);
    }
    return acc;
}

/// Split every panel of a breakpoint list in two.
inline std::vector<double> refine(const std::vector<double>& pts) {
    std::vector<double> out;
    out.reserve(2 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        out.push_back(pts[i]);
        out.push_back(0.5 * (pts[i] + pts[i + 1]));
    }
    out.push_back(pts.back());
    return out;
}

/// Uniform breakpoints over [a,b] with panel width at most max_width.
inline std::vector<double> uniform_panels(double a, double b, double max_width,
                                          int min_panels = 1) {
    const int n = std::max(min_panels,
                           static_cast<int>(std::ceil((b - a) / max_width)));
    std::vector<double> pts(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) pts[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
    return pts;
}

/// Breakpoints for an oscillatory integrand on [a,b]: at most `rad_per_panel`
/// radians of phase (rate * width) per panel.
inline std::vector<double> oscillation_panels(double a, double b, double rate,
                                              double rad_per_panel = 2.5,
                                              int min_panels = 2) {
    const double width = (rate > 0.0) ? rad_per_panel / rate : (b - a);
    return uniform_panels(a, b, std::max(width, (b - a) * 1e-6), min_panels);
}

/// Geometrically graded breakpoints on [a,b] clustering toward `a`
/// (ratio > 1).  Used for integrands that vary on the scale of (x - a).
inline std::vector<double> geometric_panels(double a, double b, double first_width,
                                            double ratio = 2.0) {
    std::vector<double> pts{a};
    double w = first_width;
    double x = a;
    while (x + w < b) {
        x += w;
        pts.push_back(x);
        w *= ratio;
    }
    pts.push_back(b);
    return pts;
}

/**
 * @brief Integrate f over (0, W] where f(w) ~ w^alpha near 0 with
 *        Re(alpha) > -1, by the substitution w = exp(tau).
 *
 * The lower truncation point is chosen so the discarded mass is below
 * 1e-17 relative to the w^(alpha+1) scaling of the head.  `osc_rate` bounds
 * |d(phase)/dw| so panels stay short where the integrand still oscillates.
 */
template <class F>
auto log_endpoint(F&& f, double W, double alpha_re, double osc_rate = 0.0,
                  int panels_per_unit = 2) -> decltype(f(1.0)) {
    if (alpha_re <= -1.0)
        throw SingularQuadratureError(
            "log_endpoint: endpoint exponent <= -1 is not integrable");
    const double span = (17.0 * 2.302585092994046 + 8.0) / (1.0 + alpha_re);
    const double tau_hi = std::log(W);
    const double tau_lo = tau_hi - span;
    // Base grid uniform in tau, then enforce the oscillation budget: phase
    // rate in tau is osc_rate * exp(tau) <= osc_rate * W.
    std::vector<double> pts;
    const int n_base = std::max(8, static_cast<int>(std::ceil(span * panels_per_unit)));
    for (int i = 0; i <= n_base; ++i)
        pts.push_back(tau_lo + span * i / n_base);
    if (osc_rate > 0.0) {
        std::vector<double> out{pts.front()};
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double ta = pts[i], tb = pts[i + 1];
            const double phase = osc_rate * std::exp(tb) * (tb - ta);
            const int sub = std::max(1, static_cast<int>(std::ceil(phase / 2.5)));
            for (int k = 1; k <= sub; ++k) out.push_back(ta + (tb - ta) * k / sub);
        }
        pts = std::move(out);
    }
    auto g = [&](double tau) {
        const double w = std::exp(tau);
        return f(w) * w;
    };
    return composite(g, pts);
}

/// Result of a doubled-resolution pass: value at the finer level plus the
/// coarse/fine discrepancy as the error estimate.
template <class F>
Estimate with_refinement(F&& f, const std::vector<double>& pts) {
    const double coarse = composite(f, pts);
    const double fine = composite(f, refine(pts));
    return Estimate{fine, std::abs(fine - coarse)};
}

template <class F>
ComplexEstimate with_refinement_c(F&& f, const std::vector<double>& pts) {
    const complex_t coarse = composite(f, pts);
    const complex_t fine = composite(f, refine(pts));
    return ComplexEstimate{fine, std::abs(fine - coarse)};
}

}  // namespace conewave::quad
