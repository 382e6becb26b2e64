/**
 * @file schur_bounds.hpp
 * @brief Schur-test machinery for the kernel pieces: damped-norm tables,
 *        the hyperbolic-weight row bound, cross-section row integrals of the
 *        exterior piece, interior majorants, and pointwise |T2| evaluators
 *        for the round sphere links.
 *
 * Everything here is a quantitative bound check: each routine either computes
 * a row/column integral that a Schur test consumes, or evaluates one side of
 * a pointwise inequality so a driver can form ratios and fit the single
 * admissible constant.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "conewave/common.hpp"
#include "conewave/cone_kernel.hpp"
#include "conewave/cross_section.hpp"
#include "conewave/interp.hpp"
#include "conewave/quadrature.hpp"
#include "conewave/specfun.hpp"

namespace conewave::schur_bounds {

using cone_kernel::Params;
using cross_section::CrossSection;

/// One pointwise or integrated bound comparison, ready for reporting.
struct BoundCheckReport {
    std::string name;
    std::vector<double> point;  ///< flattened parameter tuple of the sample
    double computed = 0.0;      ///< the quantity being bounded
    double bound = 0.0;         ///< the majorant evaluated at the same point
    double ratio = 0.0;         ///< computed / bound (0 when both vanish)
    bool pass = false;
};

namespace detail {

/// Real-valued analogue of the log-substituted endpoint integral over (0, W]
/// for f(w) ~ w^{alpha_re} at 0.  `digits` sizes the truncated head so the
/// dropped mass stays below 10^-digits relative; `panels_per_unit` trades
/// nodes for accuracy on the smooth tau-profile.
template <class F>
Estimate log_singular_real(F&& f, double W, double alpha_re,
                           double digits = 13.0,
                           double panels_per_unit = 1.0) {
    if (alpha_re <= -1.0)
        throw SingularQuadratureError(
            "log_singular_real: endpoint exponent <= -1 is not integrable");
    const double span = (digits * std::log(10.0) + 8.0) / (1.0 + alpha_re);
    const double tau_hi = std::log(W);
    const int np =
        std::max(8, static_cast<int>(std::ceil(span * panels_per_unit)));
    std::vector<double> pts(static_cast<std::size_t>(np) + 1);
    for (int i = 0; i <= np; ++i)
        pts[static_cast<std::size_t>(i)] = tau_hi - span + span * i / np;
    auto g = [&](double tau) {
        const double w = std::exp(tau);
        return f(w) * w;
    };
    return quad::with_refinement(g, pts);
}

/// Complex twin of log_singular_real (same grid policy).
template <class F>
ComplexEstimate log_singular_cplx(F&& f, double W, double alpha_re,
                                  double digits = 13.0,
                                  double panels_per_unit = 1.0) {
    if (alpha_re <= -1.0)
        throw SingularQuadratureError(
            "log_singular_cplx: endpoint exponent <= -1 is not integrable");
    const double span = (digits * std::log(10.0) + 8.0) / (1.0 + alpha_re);
    const double tau_hi = std::log(W);
    const int np =
        std::max(8, static_cast<int>(std::ceil(span * panels_per_unit)));
    std::vector<double> pts(static_cast<std::size_t>(np) + 1);
    for (int i = 0; i <= np; ++i)
        pts[static_cast<std::size_t>(i)] = tau_hi - span + span * i / np;
    auto g = [&](double tau) {
        const double w = std::exp(tau);
        return f(w) * w;
    };
    return quad::with_refinement_c(g, pts);
}

/// Breakpoints on [a,b] geometrically graded toward both endpoints with
/// first panel widths frac_a*(b-a) and frac_b*(b-a).
inline std::vector<double> edge_graded(double a, double b, double frac_a,
                                       double frac_b, double ratio = 1.6) {
    const double span = b - a;
    const double mid = 0.5 * (a + b);
    std::vector<double> pts{a};
    double w = frac_a * span;
    double x = a;
    while (x + w < mid) {
        x += w;
        pts.push_back(x);
        w *= ratio;
    }
    pts.push_back(mid);
    std::vector<double> upper{b};
    w = frac_b * span;
    x = b;
    while (x - w > mid) {
        x -= w;
        upper.push_back(x);
        w *= ratio;
    }
    for (auto it = upper.rbegin(); it != upper.rend(); ++it) pts.push_back(*it);
    return pts;
}

/// Flattened quadrature nodes and weights of a composite GL-20 rule (used
/// when many integrands share one grid).
struct FlatRule {
    std::vector<double> x;
    std::vector<double> w;
    void append_gl20(double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < quad::gl20_x.size(); ++i) {
            x.push_back(mid + half * quad::gl20_x[i]);
            w.push_back(half * quad::gl20_w[i]);
            x.push_back(mid - half * quad::gl20_x[i]);
            w.push_back(half * quad::gl20_w[i]);
        }
    }
    void append_panels(const std::vector<double>& pts) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            append_gl20(pts[i], pts[i + 1]);
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// damped-norm table N(h)
// ---------------------------------------------------------------------------

/**
 * @brief Memoized h -> N(h), the sum of the row and column Schur norms of the
 *        damped link kernel sum_j e^{-h nu_j} cos(pi nu_j) aK_j.
 *
 * Sampled log-uniformly and interpolated on (ln h, ln N); below the sampled
 * window N extends by the local power law, above it by the exponential decay
 * of the slowest mode.  Detects the identically-zero case (half-integer nu)
 * so downstream integrals can short-circuit exactly.
 */
class DampedNormTable {
  public:
    explicit DampedNormTable(CrossSection& cs, double h_lo = 5e-3,
                             double h_hi = 60.0, int per_decade = 16,
                             int refine_level = 0)
        : h_lo_(h_lo), h_hi_(h_hi) {
        if (!(h_lo > 0.0) || !(h_hi > h_lo) || per_decade < 2)
            throw ConfigError("DampedNormTable: need 0 < h_lo < h_hi and >= 2 "
                              "samples per decade");
        const int steps = std::max(
            4, static_cast<int>(std::ceil(std::log10(h_hi / h_lo) * per_decade)));
        cs.ensure_modes(1);
        nu0_ = cs.modes.empty() ? 1.0 : cs.modes.front().nu;
        // the table stores ln N + nu0 h: with the dominant exponential decay
        // factored out the stored profile varies algebraically, so cubic
        // interpolation in ln h stays accurate out to the wide last panels
        std::vector<double> lh(static_cast<std::size_t>(steps) + 1);
        std::vector<double> y(lh.size());
        double peak = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double h =
                std::exp(std::log(h_lo) +
                         (std::log(h_hi) - std::log(h_lo)) * i / steps);
            const double v =
                2.0 *
                cross_section::damped_norm_star(cs, h, 1e-12, refine_level)
                    .value;
            lh[static_cast<std::size_t>(i)] = std::log(h);
            y[static_cast<std::size_t>(i)] =
                std::log(std::max(v, 1e-300)) + nu0_ * h;
            peak = std::max(peak, v);
        }
        if (peak < 1e-280) {
            zero_ = true;
            return;
        }
        const std::size_t k = y.size() - 1;
        rate_hi_ = -(y[k] - y[k - 1]) / (std::exp(lh[k]) - std::exp(lh[k - 1]));
        pow_lo_ = (y[1] - y[0]) / (lh[1] - lh[0]);
        table_.emplace(std::move(lh), std::move(y));
    }

    bool identically_zero() const { return zero_; }
    double nu0() const { return nu0_; }

    double operator()(double h) const {
        if (zero_) return 0.0;
        if (!(h > 0.0))
            throw ConfigError("DampedNormTable: requires h > 0");
        if (h >= h_hi_)
            return std::exp((*table_)(std::log(h_hi_)) -
                            rate_hi_ * (h - h_hi_) - nu0_ * h);
        if (h <= h_lo_)
            return std::exp((*table_)(std::log(h_lo_)) +
                            pow_lo_ * (std::log(h) - std::log(h_lo_)) -
                            nu0_ * h);
        return std::exp((*table_)(std::log(h)) - nu0_ * h);
    }

  private:
    bool zero_ = false;
    double h_lo_ = 0.0, h_hi_ = 0.0;
    double nu0_ = 1.0;
    double rate_hi_ = 1.0;  ///< exponential decay rate used above h_hi
    double pow_lo_ = 0.0;   ///< log-log slope used below h_lo
    std::optional<interp::CubicHermite> table_;
};

// ---------------------------------------------------------------------------
// hyperbolic-weight row bound
// ---------------------------------------------------------------------------

/**
 * @brief integral over (Ah, infinity) of N(h) |cosh h - cosh Ah|^{beta-eps}
 *        dh: the exterior Schur row bound.  The modulus of the weight makes
 *        the exponent real, so only (n, eps) enter, not s.
 */
inline Estimate kerest2_integral(const DampedNormTable& N, int n, double eps,
                                 double Ah) {
    if (!(Ah > 0.0))
        throw ConfigError("kerest2_integral: requires Ah > 0");
    if (N.identically_zero()) return {0.0, 0.0};
    const double bw = 0.5 * (n - 2) - eps;
    const double decay = N.nu0() + eps - 0.5 * (n - 2);
    if (!(decay > 1e-8))
        throw DivergentTailError(
            "kerest2_integral: slowest mode cannot beat the hyperbolic "
            "growth of the weight");
    auto f = [&](double w) {
        const double base = 2.0 * std::sinh(Ah + 0.5 * w) * std::sinh(0.5 * w);
        return std::pow(base, bw) * N(Ah + w);
    };
    const double w1 = 1.0;
    const auto near = detail::log_singular_real(f, w1, bw, 13.0, 1.0);
    const auto far = quad::with_refinement(
        f, quad::uniform_panels(w1, w1 + 45.0 / decay,
                                2.0 / std::max(decay, 0.2), 4));
    return {near.value + far.value, near.error + far.error};
}

// ---------------------------------------------------------------------------
// cross-section row integral of the exterior piece
// ---------------------------------------------------------------------------

/**
 * @brief Memoized Ah -> I_Y(Ah) = integral over Y of |G_Ah(sigma)| dmu_Y,
 *        where G_Ah(sigma) = sum_j c_j(Ah) cos(pi nu_j) aK_j(sigma) and
 *        c_j(Ah) is the per-mode hyperbolic h-integral.
 *
 * The c_j are batch-evaluated on one shared w-grid (the integrands differ
 * only by e^{-nu_j (Ah + w)}), then the sigma-integral of |G| runs on the
 * usual graded link panels.  Mode counts adapt to e^{-nu Ah} <= e^{-34} but
 * are capped; the cap's dropped tail is negligible against the percent-level
 * tolerances this table serves.  I_Y extends below/above the sampled window
 * like DampedNormTable.
 */
class RowIntegralTable {
  public:
    RowIntegralTable(CrossSection& cs, const Params& P, double ah_lo = 1e-4,
                     double ah_hi = 40.0, int per_decade = 14,
                     int refine_level = 0, std::size_t mode_cap = 2500)
        : lo_(ah_lo), hi_(ah_hi) {
        P.validate();
        if (!(ah_lo > 0.0) || !(ah_hi > ah_lo) || per_decade < 2)
            throw ConfigError("RowIntegralTable: bad Ah window");
        const int steps = std::max(
            4,
            static_cast<int>(std::ceil(std::log10(ah_hi / ah_lo) * per_decade)));
        cs.ensure_modes(1);
        nu0_ = cs.modes.empty() ? 1.0 : cs.modes.front().nu;
        // store ln I + nu0 Ah so the interpolated profile is algebraic, not
        // exponential, across the wide log-spaced panels at large Ah
        std::vector<double> la(static_cast<std::size_t>(steps) + 1);
        std::vector<double> y(la.size());
        double peak = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double ah =
                std::exp(std::log(ah_lo) +
                         (std::log(ah_hi) - std::log(ah_lo)) * i / steps);
            const double v = sample_(cs, P, ah, refine_level, mode_cap);
            la[static_cast<std::size_t>(i)] = std::log(ah);
            y[static_cast<std::size_t>(i)] =
                std::log(std::max(v, 1e-300)) + nu0_ * ah;
            peak = std::max(peak, v);
        }
        if (peak < 1e-280) {
            zero_ = true;
            return;
        }
        const std::size_t k = y.size() - 1;
        rate_hi_ = -(y[k] - y[k - 1]) / (std::exp(la[k]) - std::exp(la[k - 1]));
        pow_lo_ = (y[1] - y[0]) / (la[1] - la[0]);
        table_.emplace(std::move(la), std::move(y));
    }

    bool identically_zero() const { return zero_; }

    double operator()(double Ah) const {
        if (zero_) return 0.0;
        if (!(Ah > 0.0))
            throw ConfigError("RowIntegralTable: requires Ah > 0");
        if (Ah >= hi_)
            return std::exp((*table_)(std::log(hi_)) - rate_hi_ * (Ah - hi_) -
                            nu0_ * Ah);
        if (Ah <= lo_)
            return std::exp((*table_)(std::log(lo_)) +
                            pow_lo_ * (std::log(Ah) - std::log(lo_)) -
                            nu0_ * Ah);
        return std::exp((*table_)(std::log(Ah)) - nu0_ * Ah);
    }

  private:
    static double sample_(CrossSection& cs, const Params& P, double Ah,
                          int refine_level, std::size_t cap) {
        // adapt the mode count to the damping; the cap grows with the
        // refinement level so stability reruns also probe cap sensitivity
        std::size_t m = cone_kernel::detail::exterior_cut(cs, Ah);
        m = std::min(m, cap << refine_level);
        cs.ensure_modes(m);
        m = std::min(m, cs.modes.size());
        if (m == 0) return 0.0;
        std::vector<double> nus(m), damp(m);
        bool all_zero = true;
        for (std::size_t j = 0; j < m; ++j) {
            nus[j] = cs.modes[j].nu;
            damp[j] = cos_pi(complex_t{nus[j], 0.0}).real();
            if (damp[j] != 0.0) all_zero = false;
        }
        if (all_zero) return 0.0;

        // shared w-grid for all per-mode hyperbolic integrals
        const complex_t bw = P.beta() - P.omega();
        const double decay0 = nus.front() - bw.real();
        if (!(decay0 > 1e-8))
            throw DivergentTailError(
                "RowIntegralTable: slowest mode decays too weakly");
        const double w1 = 1.0;
        const double span = (11.0 * std::log(10.0) + 8.0) / (1.0 + bw.real());
        detail::FlatRule rule;
        {
            const double width = 0.5 / (1 << refine_level);
            std::vector<double> tp{std::log(w1)};
            while (tp.back() > std::log(w1) - span)
                tp.push_back(tp.back() - width);
            std::reverse(tp.begin(), tp.end());
            // tau nodes carry the e^tau jacobian below
            detail::FlatRule tau_rule;
            tau_rule.append_panels(tp);
            for (std::size_t k = 0; k < tau_rule.x.size(); ++k) {
                const double w = std::exp(tau_rule.x[k]);
                rule.x.push_back(w);
                rule.w.push_back(tau_rule.w[k] * w);
            }
            auto far = quad::uniform_panels(
                w1, w1 + 45.0 / decay0,
                (2.0 / std::max(decay0, 0.2)) / (1 << refine_level), 4);
            rule.append_panels(far);
        }
        std::vector<complex_t> c(m, complex_t{0.0, 0.0});
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double w = rule.x[k];
            const double base =
                2.0 * std::sinh(Ah + 0.5 * w) * std::sinh(0.5 * w);
            const complex_t bk = rule.w[k] * rpow(base, bw);
            for (std::size_t j = 0; j < m; ++j)
                c[j] += bk * std::exp(-nus[j] * (Ah + w));
        }
        for (std::size_t j = 0; j < m; ++j) c[j] *= damp[j];

        auto g = [&](double sigma) {
            const auto row = cs.addition_row(sigma, m);
            complex_t acc{0.0, 0.0};
            for (std::size_t j = 0; j < m; ++j) acc += c[j] * row[j];
            return std::abs(acc) * cs.measure_density(sigma);
        };
        auto pts = cross_section::detail::sigma_panels(
            cs, 0.25 * std::min(1.0, Ah));
        for (int k = 0; k < refine_level; ++k) pts = quad::refine(pts);
        return quad::with_refinement(g, pts).value;
    }

    bool zero_ = false;
    double lo_ = 0.0, hi_ = 0.0;
    double nu0_ = 1.0;
    double rate_hi_ = 1.0;
    double pow_lo_ = 0.0;
    std::optional<interp::CubicHermite> table_;
};

/**
 * @brief Row integral of |T1|: integral over r' in (0, t-r) and over Y of
 *        the exterior piece's modulus, with the exact radial measure
 *        r'^{n-1} dr'.  Zero when r >= t (empty exterior support) or when
 *        the damping vanishes identically (half-integer spectrum).
 *
 * Depends on (t, r) only through r/t: the prefactor powers cancel exactly
 * against the measure under (t, r, r') -> (ct, cr, cr'), and I_Y sees only
 * the hyperbolic angle.  The integration below works in absolute variables;
 * the dilation reduction is asserted by tests rather than assumed.
 */
inline Estimate t1_row_integral(const RowIntegralTable& iy, const Params& P,
                                double t, double r) {
    if (!(t > 0.0) || !(r > 0.0))
        throw ConfigError("t1_row_integral: requires t > 0 and r > 0");
    if (r >= t || iy.identically_zero()) return {0.0, 0.0};
    const double eps = P.epsilon;
    const int n = P.n;
    const double pref_t = std::pow(t, 2.0 * (eps - 0.5 * n));
    const double L = t - r;
    // cosh(angle) - 1 = (t - r - r')(t + r + r') / (2 r r'), kept in that
    // product form so the angle survives r' -> (t-r)^- without cancellation
    auto angle = [&](double u, double rp) {
        const double d = u * (t + r + rp) / (2.0 * r * rp);
        return std::log1p(d + std::sqrt(d * (2.0 + d)));
    };
    auto f = [&](double u) {
        const double rp = L - u;
        return pref_t * std::pow(r * rp, -eps) * std::pow(rp, n - 1.0) *
               iy(angle(u, rp));
    };
    const auto head = quad::with_refinement(
        f, detail::edge_graded(0.3 * L, L, 0.2, 0.08));
    const auto tail = detail::log_singular_real(f, 0.3 * L, -eps, 11.0, 1.0);
    return {head.value + tail.value, head.error + tail.error};
}

// ---------------------------------------------------------------------------
// interior majorants and their row integrals
// ---------------------------------------------------------------------------

/**
 * @brief First interior majorant (the cos A > 0 branch):
 *        t^{2(eps-n/2)} (r r')^{-eps} [ (A^2-sigma^2)^{-eps}
 *        + (A^2-sigma^2)^{1/2-eps} / sigma ]
 *        gated to sigma < A, Interior regime, cos A > 0.
 */
inline double majorant_k1(const Params& P, double t, double r, double rp,
                          double sigma) {
    if (!(sigma > 0.0))
        throw ConfigError("majorant_k1: requires sigma > 0");
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    if (ri.regime != cone_kernel::Regime::Interior) return 0.0;
    const double A = ri.angle;
    if (std::abs(A - sigma) <= P.boundary_tol * std::max(A, sigma))
        throw BoundaryError("majorant_k1: sigma coincides with the link cone "
                            "angle A");
    if (sigma >= A || std::cos(A) <= 0.0) return 0.0;
    const double eps = P.epsilon;
    const double pref =
        std::pow(t, 2.0 * (eps - 0.5 * P.n)) * std::pow(r * rp, -eps);
    const double gap = (A - sigma) * (A + sigma);
    return pref * (std::pow(gap, -eps) + std::pow(gap, 0.5 - eps) / sigma);
}

/**
 * @brief Second interior majorant (the cos A < 0 branch):
 *        t^{2(eps-n/2)} (r r')^{-eps} [ (pi-A)^{-1/2-eps} (A-sigma)^{-eps}
 *        + (pi-A)^{1/2-eps} (A-sigma)^{1/2-eps} / sigma ].
 */
inline double majorant_k2(const Params& P, double t, double r, double rp,
                          double sigma) {
    if (!(sigma > 0.0))
        throw ConfigError("majorant_k2: requires sigma > 0");
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    if (ri.regime != cone_kernel::Regime::Interior) return 0.0;
    const double A = ri.angle;
    if (std::abs(A - sigma) <= P.boundary_tol * std::max(A, sigma))
        throw BoundaryError("majorant_k2: sigma coincides with the link cone "
                            "angle A");
    if (sigma >= A || std::cos(A) >= 0.0) return 0.0;
    const double eps = P.epsilon;
    const double pref =
        std::pow(t, 2.0 * (eps - 0.5 * P.n)) * std::pow(r * rp, -eps);
    const double pa = pi - A, gap = A - sigma;
    return pref * (std::pow(pa, -0.5 - eps) * std::pow(gap, -eps) +
                   std::pow(pa, 0.5 - eps) * std::pow(gap, 0.5 - eps) / sigma);
}

namespace detail {

/// integral over (0, A) of (A^2-sigma^2)^{-eps} w(sigma) dsigma plus the
/// companion (A^2-sigma^2)^{1/2-eps}/sigma term: the Y-integral of the
/// first majorant's bracket.
inline double k1_link_integral(const CrossSection& cs, double eps, double A) {
    auto f1 = [&](double u) {
        return std::pow(u * (2.0 * A - u), -eps) *
               cs.measure_density(A - u);
    };
    auto f2 = [&](double u) {
        return std::pow(u * (2.0 * A - u), 0.5 - eps) *
               cs.measure_density(A - u) / (A - u);
    };
    return log_singular_real(f1, A, -eps, 10.0, 1.0).value +
           log_singular_real(f2, A, 0.5 - eps, 10.0, 1.0).value;
}

/// The two sigma-integrals of the second majorant's bracket, returned as
/// { integral (A-sigma)^{-eps} w, integral (A-sigma)^{1/2-eps} w / sigma }.
inline std::pair<double, double> k2_link_integrals(const CrossSection& cs,
                                                   double eps, double A) {
    auto f1 = [&](double u) {
        return std::pow(u, -eps) * cs.measure_density(A - u);
    };
    auto f2 = [&](double u) {
        return std::pow(u, 0.5 - eps) * cs.measure_density(A - u) / (A - u);
    };
    return {log_singular_real(f1, A, -eps, 10.0, 1.0).value,
            log_singular_real(f2, A, 0.5 - eps, 10.0, 1.0).value};
}

}  // namespace detail

/**
 * @brief Row integral of the first majorant over r' in (sqrt(max(t^2-r^2,0))
 *        or r-t, t+r) and over Y.  Scale-free in (t, r) together (depends on
 *        r/t only), which the tests assert.
 */
inline Estimate k1_row_integral(const CrossSection& cs, const Params& P,
                                double t, double r) {
    if (!(t > 0.0) || !(r > 0.0))
        throw ConfigError("k1_row_integral: requires t > 0 and r > 0");
    const double eps = P.epsilon;
    const int n = P.n;
    const double lo = (t > r) ? std::sqrt(t * t - r * r) : (r - t);
    const double hi = t + r;
    const double pref_t = std::pow(t, 2.0 * (eps - 0.5 * n));
    auto f = [&](double rp) {
        const double ca = (r * r + rp * rp - t * t) / (2.0 * r * rp);
        if (!(ca > 0.0) || !(ca < 1.0)) return 0.0;
        const double A = std::acos(ca);
        return pref_t * std::pow(r * rp, -eps) * std::pow(rp, n - 1.0) *
               detail::k1_link_integral(cs, eps, A);
    };
    return quad::with_refinement(
        f, detail::edge_graded(lo, hi, 0.05, 0.02));
}

/**
 * @brief Row integral of the second majorant over r' in (t-r, sqrt(t^2-r^2))
 *        and over Y; empty (zero) when t <= r.  The (pi-A)^{-1/2-eps} factor
 *        blows up like (r'-(t-r))^{-(1/2+eps)/2} at the lower endpoint, which
 *        the log-substituted head absorbs.
 */
inline Estimate k2_row_integral(const CrossSection& cs, const Params& P,
                                double t, double r) {
    if (!(t > 0.0) || !(r > 0.0))
        throw ConfigError("k2_row_integral: requires t > 0 and r > 0");
    if (t <= r) return {0.0, 0.0};
    const double eps = P.epsilon;
    const int n = P.n;
    const double lo = t - r;
    const double hi = std::sqrt(t * t - r * r);
    const double pref_t = std::pow(t, 2.0 * (eps - 0.5 * n));
    auto f = [&](double rp) {
        const double ca = (r * r + rp * rp - t * t) / (2.0 * r * rp);
        if (!(ca > -1.0) || !(ca < 0.0)) return 0.0;
        const double A = std::acos(ca);
        const auto [j1, j2] = detail::k2_link_integrals(cs, eps, A);
        const double pa = pi - A;
        return pref_t * std::pow(r * rp, -eps) * std::pow(rp, n - 1.0) *
               (std::pow(pa, -0.5 - eps) * j1 + std::pow(pa, 0.5 - eps) * j2);
    };
    const double gap = hi - lo;
    auto head_f = [&](double u) { return f(lo + u); };
    const auto head = detail::log_singular_real(
        head_f, 0.4 * gap, -0.5 * (0.5 + eps), 10.0, 1.0);
    const auto rest = quad::with_refinement(
        f, detail::edge_graded(lo + 0.4 * gap, hi, 0.1, 0.1));
    return {head.value + rest.value, head.error + rest.error};
}

// ---------------------------------------------------------------------------
// pointwise |T2| for the round links
// ---------------------------------------------------------------------------

/**
 * @brief |T2| at one point for the round 2-sphere link (n = 3).
 *
 * The link wave profile sums to the sine-series closed form
 *   sum_l P_l(cos sigma) sin((l+1/2) h) = H(h - sigma) st(h),
 *   st(h) = (2 (cos sigma - cos h))^{-1/2},
 * so the interior piece becomes (pref / 2 pi) times the h-derivative of
 * H st paired with the weight W(h) = (cos h - cos A)^{beta-omega}.  Moving
 * the cut c = (sigma+A)/2 between the two singular endpoints turns that
 * pairing into the cut-independent finite combination
 *   st(c) W(c) - integral_sigma^c st W' + integral_c^A st' W,
 * each term evaluable by endpoint-substituted quadrature.
 */
inline Estimate t2_abs_sphere2(const Params& P, double t, double r, double rp,
                               double sigma) {
    if (P.n != 3)
        throw ConfigError("t2_abs_sphere2: the round 2-sphere link means n = 3");
    if (!(sigma > 0.0) || !(sigma < pi))
        throw ConfigError("t2_abs_sphere2: requires sigma in (0, pi)");
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    if (ri.regime != cone_kernel::Regime::Interior) return {0.0, 0.0};
    const double A = ri.angle;
    if (std::abs(A - sigma) <= P.boundary_tol * std::max(A, sigma))
        throw BoundaryError("t2_abs_sphere2: sigma coincides with A");
    if (sigma > A) return {0.0, 0.0};

    const complex_t bw = P.beta() - P.omega();
    // cos h - cos A and cos sigma - cos h in cancellation-free product form
    auto wbase = [&](double u) {  // u = A - h
        return 2.0 * std::sin(0.5 * (2.0 * A - u)) * std::sin(0.5 * u);
    };
    auto sbase = [&](double u) {  // u = h - sigma
        return 2.0 * std::sin(0.5 * (2.0 * sigma + u)) * std::sin(0.5 * u);
    };
    const double c = 0.5 * (sigma + A);
    const complex_t w_c = rpow(wbase(A - c), bw);
    const double st_c = std::pow(2.0 * sbase(c - sigma), -0.5);

    // integral over (sigma, c) of st(h) W'(h) dh, u = h - sigma
    auto f1 = [&](double u) {
        const double h = sigma + u;
        const complex_t wp =
            bw * rpow(wbase(A - h), bw - 1.0) * (-std::sin(h));
        return std::pow(2.0 * sbase(u), -0.5) * wp;
    };
    const auto e1 = detail::log_singular_cplx(f1, c - sigma, -0.5, 13.0, 1.0);

    // integral over (c, A) of st'(h) W(h) dh, u = A - h
    auto f2 = [&](double u) {
        const double h = A - u;
        const double stp =
            -std::sin(h) * std::pow(2.0 * sbase(h - sigma), -1.5);
        return stp * rpow(wbase(u), bw);
    };
    const auto e2 = detail::log_singular_cplx(f2, A - c, bw.real(), 13.0, 1.0);

    const complex_t pref = cone_kernel::detail::radial_prefactor(P, t, r, rp);
    const complex_t total =
        pref * (st_c * w_c - e1.value + e2.value) / (2.0 * pi);
    return {std::abs(total),
            std::abs(pref) * (e1.error + e2.error) / (2.0 * pi)};
}

/**
 * @brief |T2| at one point for the round 3-sphere link (n = 4), in closed
 *        form.
 *
 * The link wave profile is a pure delta derivative on the light cone
 * (sum_k k sin(k sigma) cos(k h) acts as -pi delta'(sigma - h) on (0, pi)),
 * so pairing with the weight leaves
 *   T2 = pref (beta-omega) (cos sigma - cos A)^{beta-omega-1} / (4 pi).
 */
inline double t2_abs_sphere3(const Params& P, double t, double r, double rp,
                             double sigma) {
    if (P.n != 4)
        throw ConfigError("t2_abs_sphere3: the round 3-sphere link means n = 4");
    if (!(sigma > 0.0) || !(sigma < pi))
        throw ConfigError("t2_abs_sphere3: requires sigma in (0, pi)");
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    if (ri.regime != cone_kernel::Regime::Interior) return 0.0;
    const double A = ri.angle;
    if (std::abs(A - sigma) <= P.boundary_tol * std::max(A, sigma))
        throw BoundaryError("t2_abs_sphere3: sigma coincides with A");
    if (sigma > A) return 0.0;
    const complex_t bw = P.beta() - P.omega();
    const double base =
        2.0 * std::sin(0.5 * (A + sigma)) * std::sin(0.5 * (A - sigma));
    const complex_t pref = cone_kernel::detail::radial_prefactor(P, t, r, rp);
    return std::abs(pref * bw * rpow(base, bw - 1.0)) / (4.0 * pi);
}

/// Dimension dispatch for the pointwise |T2| of the round links.
inline double t2_abs(const Params& P, double t, double r, double rp,
                     double sigma) {
    if (P.n == 3) return t2_abs_sphere2(P, t, r, rp, sigma).value;
    if (P.n == 4) return t2_abs_sphere3(P, t, r, rp, sigma);
    throw UnsupportedCrossSection(
        "t2_abs: pointwise evaluation implemented for the round links of "
        "cone dimensions 3 and 4");
}

/// Ratio of |T2| to the two-branch interior majorant at one sample point.
/// `pass` records that the ratio is finite (the fitted constant is taken
/// over a whole sample by the caller).
inline BoundCheckReport t2_pointwise_bound_check(const Params& P, double t,
                                                 double r, double rp,
                                                 double sigma) {
    BoundCheckReport rep;
    rep.name = "t2-pointwise";
    rep.point = {t, r, rp, sigma};
    rep.computed = t2_abs(P, t, r, rp, sigma);
    rep.bound = majorant_k1(P, t, r, rp, sigma) +
                majorant_k2(P, t, r, rp, sigma);
    if (rep.bound > 0.0) {
        rep.ratio = rep.computed / rep.bound;
    } else {
        rep.ratio = (rep.computed == 0.0)
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
    }
    rep.pass = std::isfinite(rep.ratio);
    return rep;
}

/// Fitted log-log slope p of |T2| ~ (A - sigma)^{-p} as sigma -> A^- at a
/// fixed interior triple; the majorants predict p = eps.
inline double t2_edge_exponent(const Params& P, double t, double r,
                               double rp) {
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    if (ri.regime != cone_kernel::Regime::Interior)
        throw ConfigError("t2_edge_exponent: needs an Interior point");
    const double A = ri.angle;
    const std::vector<double> frac = {0.04, 0.02, 0.01, 0.005, 0.0025};
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (double x : frac) {
        const double gap = x * A;
        const double v = t2_abs(P, t, r, rp, A - gap);
        const double lx = std::log(gap), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(frac.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -slope;
}

}  // namespace conewave::schur_bounds
