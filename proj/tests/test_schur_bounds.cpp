/**
 * @file test_schur_bounds.cpp
 * @brief Damped-norm and row-integral tables against their shifted-sphere
 *        closed laws, the t1 row integral's dilation invariance, interior
 *        majorant gating, and the pointwise |T2| evaluators against
 *        Abel-extrapolated mode sums.
 */
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "conewave/cone_kernel.hpp"
#include "conewave/cross_section.hpp"
#include "conewave/schur_bounds.hpp"

using Catch::Approx;
using namespace conewave;
using cone_kernel::Params;
using cross_section::CrossSection;

namespace {

/// Shared spectra, built once: the shifted 2-sphere (all tables nonzero)
/// and the round spheres (tables vanish identically / feed the T2 oracles).
CrossSection& shifted_sphere() {
    static CrossSection cs = cross_section::make_shifted_sphere2(0.3, 1 << 14);
    return cs;
}

CrossSection& round_sphere2() {
    static CrossSection cs = cross_section::build_spectrum(
        cross_section::SphereZeroPotential{2, 1 << 14});
    return cs;
}

CrossSection& round_sphere3() {
    static CrossSection cs = cross_section::build_spectrum(
        cross_section::SphereZeroPotential{3, 1 << 14});
    return cs;
}

/// For the 0.3-shifted 2-sphere (nu_l = l + 0.8) the damping factor is
/// (-1)^l cos(0.8 pi); the sign flip maps sigma -> pi - sigma inside the
/// modulus, and the remaining sum is the positive Poisson kernel of the
/// addition theorem, a probability density on the link.  Both Schur tables
/// therefore collapse to laws free of any sigma-quadrature:
///   N(h)   = 2 |cos(0.8 pi)| e^{-0.8 h}, and
///   I_Y(Ah) = |cos(0.8 pi)| Re integral_{Ah}^inf (cosh h - cosh Ah)^{beta
///             - omega} e^{-0.8 h} dh  (the nu = 0.8 exterior h-integral).
double shifted_norm_law(double h) {
    return 2.0 * std::abs(std::cos(0.8 * pi)) * std::exp(-0.8 * h);
}

double shifted_row_law(const Params& P, double Ah) {
    return std::abs(std::cos(0.8 * pi)) *
           cone_kernel::h_integral_exterior(P, 0.8, Ah).value.real();
}

/// Abel-regularised interior mode sum extrapolated to zero damping by a
/// Neville table.  Valid as a T2 reference for the 3-sphere link, whose
/// damped profile is meromorphic in the damping (pole at the light cone
/// only); the 2-sphere profile has a branch point instead, which makes the
/// polynomial extrapolation wrong there -- the 2-sphere reference below
/// extrapolates in sqrt(eta) on the smoothed closed form instead.
double abel_t2(CrossSection& cs, const Params& P, double t, double r,
               double rp, double sigma) {
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    REQUIRE(ri.regime == cone_kernel::Regime::Interior);
    const std::vector<double> etas = {0.4, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05};
    std::vector<complex_t> vals;
    for (double eta : etas) {
        const std::size_t want =
            static_cast<std::size_t>(40.0 / eta) + 8;
        const std::size_t m = std::min(cs.ensure_modes(want), want);
        const auto row = cs.addition_row(sigma, m);
        complex_t acc{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j)
            acc += row[j] * std::exp(-eta * cs.modes[j].nu) *
                   cone_kernel::detail::mode_closed(P, cs.modes[j].nu, t, r,
                                                    rp, ri);
        vals.push_back(acc);
    }
    for (std::size_t k = 1; k < etas.size(); ++k)
        for (std::size_t i = etas.size() - 1; i >= k; --i)
            vals[i] = vals[i] + (vals[i] - vals[i - 1]) * (0.0 - etas[i]) /
                                    (etas[i] - etas[i - k]);
    const complex_t gam = specfun::gamma_complex(0.5 * P.n - P.omega());
    return std::abs(vals.back() * std::sqrt(2.0 * pi) * gam);
}

/// Damping-smoothed closed form of the 2-sphere link wave profile's
/// h-derivative:  sum_l (2l+1)/(4 pi) P_l(cos sigma) cos((l+1/2) h)
/// e^{-eta(l+1/2)}  =  (1/2pi) Im[ sin(h+i eta)
/// (2 cos(h+i eta) - 2 cos sigma)^{-3/2} ], from the Legendre generating
/// function continued to complex angle.
double sphere2_profile_deriv(double sigma, double h, double eta) {
    const complex_t z{h, eta};
    const complex_t b = 2.0 * (std::cos(z) - std::cos(sigma));
    return (std::sin(z) * std::pow(b, complex_t{-1.5, 0.0})).imag();
}

/// Independent T2 reference for the 2-sphere link: integrate the smoothed
/// profile derivative against the weight at finite damping eta (an honest,
/// everywhere-smooth integral), then extrapolate eta -> 0 by a Neville
/// table in sqrt(eta) (the profile's branch point sits at distance eta from
/// the integration contour, so the expansion runs in half powers).
double smoothed_t2_sphere2(const Params& P, double t, double r, double rp,
                           double sigma) {
    const auto ri = cone_kernel::classify_regime(t, r, rp, P.boundary_tol);
    REQUIRE(ri.regime == cone_kernel::Regime::Interior);
    const double A = ri.angle;
    const complex_t bw = P.beta() - P.omega();
    auto t2_eta = [&](double eta) {
        auto f = [&](double h) {
            const double wb =
                2.0 * std::sin(0.5 * (A - h)) * std::sin(0.5 * (A + h));
            return sphere2_profile_deriv(sigma, h, eta) * rpow(wb, bw);
        };
        const double cut = 0.5 * (sigma + A);
        const double m0 = std::max(0.3 * sigma, sigma - 50.0 * eta);
        const double m1 = std::min(sigma + 50.0 * eta,
                                   sigma + 0.4 * (A - sigma));
        const auto left = quad::with_refinement_c(
            f, quad::uniform_panels(1e-12, m0, 0.05));
        const auto mid = quad::with_refinement_c(
            f, quad::uniform_panels(m0, m1, 0.5 * eta));
        const auto graded = quad::with_refinement_c(
            f, schur_bounds::detail::edge_graded(m1, cut, 0.05, 0.05));
        // u = A - h directly so the weight base never cancels
        auto fu = [&](double u) {
            const double wb =
                2.0 * std::sin(0.5 * u) * std::sin(0.5 * (2.0 * A - u));
            return sphere2_profile_deriv(sigma, A - u, eta) * rpow(wb, bw);
        };
        const auto edge = schur_bounds::detail::log_singular_cplx(
            fu, A - cut, bw.real(), 12.0, 1.0);
        const complex_t pref =
            cone_kernel::detail::radial_prefactor(P, t, r, rp);
        return pref *
               (left.value + mid.value + graded.value + edge.value) /
               (2.0 * pi);
    };
    const std::vector<double> etas = {0.02, 0.015, 0.01, 0.007,
                                      0.005, 0.003, 0.002};
    std::vector<complex_t> vals;
    std::vector<double> us;
    for (double eta : etas) {
        vals.push_back(t2_eta(eta));
        us.push_back(std::sqrt(eta));
    }
    for (std::size_t k = 1; k < us.size(); ++k)
        for (std::size_t i = us.size() - 1; i >= k; --i)
            vals[i] = vals[i] + (vals[i] - vals[i - 1]) * (0.0 - us[i]) /
                                    (us[i] - us[i - k]);
    return std::abs(vals.back());
}

}  // namespace

TEST_CASE("damped norm table matches the shifted-sphere law",
          "[schur_bounds]") {
    auto& cs = shifted_sphere();
    schur_bounds::DampedNormTable table(cs);
    REQUIRE_FALSE(table.identically_zero());
    REQUIRE(table.nu0() == Approx(0.8).epsilon(1e-12));

    // in-window: interpolation of converged sigma-quadratures
    for (double h : {0.05, 0.3, 2.0, 8.0, 30.0})
        REQUIRE(rel_diff(table(h), shifted_norm_law(h)) < 2e-3);
    // the exact sample points carry no interpolation error at all
    REQUIRE(rel_diff(table(5e-3), shifted_norm_law(5e-3)) < 1e-9);
    // extrapolation beyond the window stays law-abiding
    REQUIRE(rel_diff(table(80.0), shifted_norm_law(80.0)) < 1e-2);
    REQUIRE(rel_diff(table(1e-3), shifted_norm_law(1e-3)) < 2e-2);
    REQUIRE_THROWS_AS(table(0.0), ConfigError);
}

TEST_CASE("kerest2 integral matches the shifted-sphere law",
          "[schur_bounds]") {
    auto& cs = shifted_sphere();
    schur_bounds::DampedNormTable table(cs);
    // the weighted integral of the law collapses to the same per-mode
    // hyperbolic integral that the exterior kernel uses, with exponent
    // beta - eps (the modulus strips the oscillatory s-part)
    for (int n : {3, 4}) {
        for (double eps : {0.6, 0.75, 0.9}) {
            const auto P = Params::multiplier(n, eps);
            for (double Ah : {0.05, 0.5, 3.0}) {
                const auto got =
                    schur_bounds::kerest2_integral(table, n, eps, Ah);
                const double law = 2.0 * shifted_row_law(P, Ah);
                REQUIRE(rel_diff(got.value, law) < 1e-4);
                REQUIRE(got.error < 1e-3 * std::abs(got.value) + 1e-12);
            }
        }
    }
    REQUIRE_THROWS_AS(schur_bounds::kerest2_integral(table, 3, 0.75, 0.0),
                      ConfigError);
}

TEST_CASE("half-integer spectra kill the damped tables exactly",
          "[schur_bounds]") {
    auto& cs = round_sphere2();
    schur_bounds::DampedNormTable table(cs, 5e-3, 60.0, 4);
    REQUIRE(table.identically_zero());
    REQUIRE(table(1.0) == 0.0);
    REQUIRE(schur_bounds::kerest2_integral(table, 3, 0.75, 0.7).value == 0.0);

    const auto P = Params::multiplier(3, 0.75);
    schur_bounds::RowIntegralTable iy(cs, P, 1e-3, 10.0, 3);
    REQUIRE(iy.identically_zero());
    REQUIRE(schur_bounds::t1_row_integral(iy, P, 1.0, 0.4).value == 0.0);
}

TEST_CASE("row integral table matches the shifted-sphere law",
          "[schur_bounds]") {
    auto& cs = shifted_sphere();
    const auto P = Params::multiplier(3, 0.75);
    schur_bounds::RowIntegralTable iy(cs, P);
    REQUIRE_FALSE(iy.identically_zero());
    for (double Ah : {0.01, 0.1, 1.0, 5.0})
        REQUIRE(rel_diff(iy(Ah), shifted_row_law(P, Ah)) < 1e-3);
    REQUIRE_THROWS_AS(iy(-1.0), ConfigError);
}

TEST_CASE("t1 row integral: dilation invariance and reduced-law agreement",
          "[schur_bounds]") {
    auto& cs = shifted_sphere();
    const auto P = Params::multiplier(3, 0.75);
    schur_bounds::RowIntegralTable iy(cs, P);

    const auto base = schur_bounds::t1_row_integral(iy, P, 1.0, 0.4);
    REQUIRE(base.value > 0.0);
    // r >= t has empty exterior support
    REQUIRE(schur_bounds::t1_row_integral(iy, P, 1.0, 1.0).value == 0.0);
    REQUIRE(schur_bounds::t1_row_integral(iy, P, 1.0, 2.5).value == 0.0);

    // the weighted row integral depends on r/t only; the t-powers cancel
    // exactly, not just approximately
    for (double c : {0.3, 2.7, 11.0}) {
        const auto scaled =
            schur_bounds::t1_row_integral(iy, P, c * 1.0, c * 0.4);
        REQUIRE(rel_diff(scaled.value, base.value) < 1e-9);
    }

    // direct r'-quadrature of the law as an independent reference
    const double t = 1.0, r = 0.4;
    auto f = [&](double rp) {
        const double x = (t * t - r * r - rp * rp) / (2.0 * r * rp);
        if (!(x > 1.0)) return 0.0;
        const double Ah = std::acosh(x);
        return std::pow(t, 2.0 * 0.75 - 3.0) * std::pow(r * rp, -0.75) *
               rp * rp * shifted_row_law(P, Ah);
    };
    const double L = t - r;
    const auto direct = quad::with_refinement(
        f, schur_bounds::detail::edge_graded(1e-7 * L, L * (1.0 - 1e-10),
                                             0.05, 1e-4));
    REQUIRE(rel_diff(base.value, direct.value) < 5e-4);
}

TEST_CASE("interior majorants gate on regime, sign and ordering",
          "[schur_bounds]") {
    const auto P = Params::multiplier(3, 0.75);
    // t=1, r=rp=0.8: cos A = (0.64+0.64-1)/(2*0.64) > 0, A ~ 1.349
    const double t = 1.0, r = 0.8, rp = 0.8;
    const double A = std::acos((r * r + rp * rp - t * t) / (2.0 * r * rp));

    REQUIRE(schur_bounds::majorant_k1(P, t, r, rp, 0.5) > 0.0);
    REQUIRE(schur_bounds::majorant_k2(P, t, r, rp, 0.5) == 0.0);
    // sigma past the cone angle: both branches vanish
    REQUIRE(schur_bounds::majorant_k1(P, t, r, rp, A + 0.3) == 0.0);
    REQUIRE(schur_bounds::majorant_k2(P, t, r, rp, A + 0.3) == 0.0);
    // exterior and zero regimes vanish
    REQUIRE(schur_bounds::majorant_k1(P, 5.0, r, rp, 0.5) == 0.0);
    REQUIRE(schur_bounds::majorant_k1(P, 0.1, 2.0, 0.3, 0.5) == 0.0);
    // the obtuse branch: t=1, r=rp=0.53 gives cos A < 0
    REQUIRE(schur_bounds::majorant_k2(P, 1.0, 0.53, 0.53, 0.5) > 0.0);
    REQUIRE(schur_bounds::majorant_k1(P, 1.0, 0.53, 0.53, 0.5) == 0.0);
    // guards
    REQUIRE_THROWS_AS(schur_bounds::majorant_k1(P, t, r, rp, 0.0),
                      ConfigError);
    REQUIRE_THROWS_AS(schur_bounds::majorant_k1(P, t, r, rp, A),
                      BoundaryError);
    REQUIRE_THROWS_AS(schur_bounds::majorant_k2(P, t, r, rp, A),
                      BoundaryError);

    // explicit value of the acute branch at one point
    const double sig = 0.5;
    const double gap = (A - sig) * (A + sig);
    const double want = std::pow(1.0, 2.0 * (0.75 - 1.5)) *
                        std::pow(r * rp, -0.75) *
                        (std::pow(gap, -0.75) +
                         std::pow(gap, -0.25) / sig);
    REQUIRE(schur_bounds::majorant_k1(P, t, r, rp, sig) ==
            Approx(want).epsilon(1e-14));
}

TEST_CASE("pointwise T2 for the round 3-sphere link matches the Abel sum",
          "[schur_bounds]") {
    auto& cs = round_sphere3();
    const auto P = Params::multiplier(4, 0.75);
    const double t = 1.0, r = 0.8, rp = 0.55, sigma = 0.6;
    const double closed = schur_bounds::t2_abs_sphere3(P, t, r, rp, sigma);
    const double abel = abel_t2(cs, P, t, r, rp, sigma);
    REQUIRE(rel_diff(closed, abel) < 1e-6);

    // sigma beyond the cone angle: exactly zero (the delta' sits at h=sigma>A)
    const double A =
        std::acos((r * r + rp * rp - t * t) / (2.0 * r * rp));
    REQUIRE(schur_bounds::t2_abs_sphere3(P, t, r, rp, A + 0.2) == 0.0);
    REQUIRE(schur_bounds::t2_abs(P, 5.0, r, rp, sigma) == 0.0);
    REQUIRE_THROWS_AS(schur_bounds::t2_abs_sphere3(P, t, r, rp, A),
                      BoundaryError);
    REQUIRE_THROWS_AS(
        schur_bounds::t2_abs_sphere3(Params::multiplier(3, 0.75), t, r, rp,
                                     sigma),
        ConfigError);
}

TEST_CASE("pointwise T2 for the round 2-sphere link matches the smoothed "
          "closed form",
          "[schur_bounds]") {
    const auto P = Params::multiplier(3, 0.75);
    const double t = 1.0, r = 0.8, rp = 0.55, sigma = 0.6;
    const auto mc = schur_bounds::t2_abs_sphere2(P, t, r, rp, sigma);
    const double want = smoothed_t2_sphere2(P, t, r, rp, sigma);
    REQUIRE(rel_diff(mc.value, want) < 1e-6);
    REQUIRE(mc.error < 1e-6 * mc.value + 1e-12);

    // the moved-cut formula also covers complex omega (s != 0)
    const auto Ps = Params::multiplier(3, 0.75, 1.0);
    REQUIRE(rel_diff(schur_bounds::t2_abs_sphere2(Ps, t, r, rp, sigma).value,
                     smoothed_t2_sphere2(Ps, t, r, rp, sigma)) < 1e-6);

    REQUIRE(schur_bounds::t2_abs_sphere2(P, t, r, rp, 2.5).value == 0.0);
    REQUIRE_THROWS_AS(
        schur_bounds::t2_abs_sphere2(Params::multiplier(4, 0.75), t, r, rp,
                                     sigma),
        ConfigError);
    REQUIRE_THROWS_AS(schur_bounds::t2_abs_sphere2(P, t, r, rp, 4.0),
                      ConfigError);
}

TEST_CASE("sine-line weight annihilates the 2-sphere interior piece",
          "[schur_bounds]") {
    // The cone over the round 2-sphere is flat 3-space, whose sine
    // propagator lives on the light cone only: with the sine-line weight
    // exponent -1/2 the moved-cut combination must vanish identically for
    // every sigma strictly inside the cone angle.
    const double t = 1.0, r = 0.8, rp = 0.55;
    const double A = std::acos((r * r + rp * rp - t * t) / (2.0 * r * rp));
    const complex_t bw{-0.5, 0.0};
    for (double sigma : {0.3, 0.6, 1.1}) {
        auto wbase = [&](double u) {
            return 2.0 * std::sin(0.5 * (2.0 * A - u)) * std::sin(0.5 * u);
        };
        auto sbase = [&](double u) {
            return 2.0 * std::sin(0.5 * (2.0 * sigma + u)) *
                   std::sin(0.5 * u);
        };
        const double c = 0.5 * (sigma + A);
        const complex_t boundary =
            std::pow(2.0 * sbase(c - sigma), -0.5) * rpow(wbase(A - c), bw);
        auto f1 = [&](double u) {
            const double h = sigma + u;
            return std::pow(2.0 * sbase(u), -0.5) * bw *
                   rpow(wbase(A - h), bw - 1.0) * (-std::sin(h));
        };
        auto f2 = [&](double u) {
            const double h = A - u;
            return -std::sin(h) * std::pow(2.0 * sbase(h - sigma), -1.5) *
                   rpow(wbase(u), bw);
        };
        const auto e1 =
            schur_bounds::detail::log_singular_cplx(f1, c - sigma, -0.5);
        const auto e2 =
            schur_bounds::detail::log_singular_cplx(f2, A - c, bw.real());
        REQUIRE(std::abs(boundary - e1.value + e2.value) ==
                Approx(0.0).margin(1e-10));
    }
}

TEST_CASE("T2 edge growth follows the majorant exponent", "[schur_bounds]") {
    const auto P3 = Params::multiplier(3, 0.75);
    const auto P4 = Params::multiplier(4, 0.75);
    REQUIRE(schur_bounds::t2_edge_exponent(P3, 1.0, 0.8, 0.55) ==
            Approx(0.75).margin(0.1));
    REQUIRE(schur_bounds::t2_edge_exponent(P4, 1.0, 0.8, 0.55) ==
            Approx(0.75).margin(0.01));
    REQUIRE_THROWS_AS(schur_bounds::t2_edge_exponent(P3, 9.0, 0.8, 0.55),
                      ConfigError);
}

TEST_CASE("T2 stays a bounded multiple of the interior majorants",
          "[schur_bounds]") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int n : {3, 4}) {
        const auto P = Params::multiplier(n, 0.75);
        double worst = 0.0;
        int kept = 0;
        while (kept < 60) {
            const double t = 0.5 + 1.5 * uni(rng);
            const double r = 0.2 + 0.9 * uni(rng);
            const double rp = 0.2 + 0.9 * uni(rng);
            const auto ri = cone_kernel::classify_regime(t, r, rp, 1e-9);
            if (ri.regime != cone_kernel::Regime::Interior) continue;
            const double sigma = ri.angle * (0.05 + 0.90 * uni(rng));
            const auto rep =
                schur_bounds::t2_pointwise_bound_check(P, t, r, rp, sigma);
            REQUIRE(rep.pass);
            worst = std::max(worst, rep.ratio);
            ++kept;
        }
        REQUIRE(worst > 0.0);
        // single admissible constant for the whole sample
        REQUIRE(worst < 10.0);
    }
}

TEST_CASE("majorant row integrals depend on r/t only", "[schur_bounds]") {
    auto& cs = round_sphere2();
    const auto P = Params::multiplier(3, 0.75);
    const auto k1a = schur_bounds::k1_row_integral(cs, P, 1.0, 0.45);
    const auto k1b = schur_bounds::k1_row_integral(cs, P, 3.0, 1.35);
    REQUIRE(k1a.value > 0.0);
    REQUIRE(rel_diff(k1a.value, k1b.value) < 1e-6);

    const auto k2a = schur_bounds::k2_row_integral(cs, P, 1.0, 0.45);
    const auto k2b = schur_bounds::k2_row_integral(cs, P, 3.0, 1.35);
    REQUIRE(k2a.value > 0.0);
    REQUIRE(rel_diff(k2a.value, k2b.value) < 1e-6);
    // r >= t: the obtuse window (t-r, sqrt(t^2-r^2)) is empty
    REQUIRE(schur_bounds::k2_row_integral(cs, P, 1.0, 1.2).value == 0.0);
}

TEST_CASE("exterior row bound sits under half the weighted norm integral",
          "[schur_bounds]") {
    auto& cs = shifted_sphere();
    const auto P = Params::multiplier(3, 0.75);
    schur_bounds::DampedNormTable table(cs);
    schur_bounds::RowIntegralTable iy(cs, P);
    for (double Ah : {0.1, 1.0}) {
        const double lhs = iy(Ah);
        const double rhs =
            0.5 * schur_bounds::kerest2_integral(table, 3, 0.75, Ah).value;
        REQUIRE(lhs <= rhs * (1.0 + 1e-9));
    }
}

TEST_CASE("singular quadrature guard rejects non-integrable exponents",
          "[schur_bounds]") {
    auto f = [](double w) { return std::pow(w, -1.2); };
    REQUIRE_THROWS_AS(schur_bounds::detail::log_singular_real(f, 1.0, -1.2),
                      SingularQuadratureError);
}
