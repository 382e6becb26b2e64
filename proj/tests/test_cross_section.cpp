/**
 * @file test_cross_section.cpp
 * @brief Spectrum construction, addition kernels, damped mode sums and their
 *        Schur norms over the built-in and explicit cross-sections.
 */
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "conewave/cross_section.hpp"

using Catch::Approx;
using namespace conewave;
using namespace conewave::cross_section;

namespace {

/// Reference sum for the exponentially damped sphere kernel with every order
/// displaced off the half-integers: a closed Poisson-type expression.
/// With q = e^-h,
///   sum_l (2l+1)/(4 pi) e^{-h(l+0.8)} cos(pi(l+0.8)) P_l(cos s)
///     = cos(0.8 pi) e^{-0.8 h} (1-q^2) / (4 pi (1 + 2 q cos s + q^2)^{3/2}).
double shifted_sphere_closed(double h, double sigma) {
    const double q = std::exp(-h);
    const double denom = 1.0 + 2.0 * q * std::cos(sigma) + q * q;
    return std::cos(0.8 * pi) * std::exp(-0.8 * h) * (1.0 - q * q) /
           (4.0 * pi * std::pow(denom, 1.5));
}

}  // namespace

TEST_CASE("sphere S^2 spectrum: orders, multiplicities, kernel at the origin",
          "[cross_section]") {
    auto cs = build_spectrum(SphereZeroPotential{2, 32});
    REQUIRE(cs.n == 3);
    REQUIRE(cs.beta == 0.5);
    REQUIRE(cs.volume == Approx(4.0 * pi));
    REQUIRE(cs.modes.size() == 32);
    for (std::size_t l = 0; l < 8; ++l) {
        // lambda = l(l+1) gives nu = l + 1/2 exactly in double precision
        REQUIRE(cs.modes[l].nu == static_cast<double>(l) + 0.5);
        REQUIRE(cs.modes[l].multiplicity == 2.0 * l + 1.0);
        // reproducing kernel at coincidence equals multiplicity / volume
        const auto at0 = cs.modes[l].addition_kernel(0.0);
        REQUIRE(at0.real() ==
                Approx((2.0 * l + 1.0) / (4.0 * pi)).epsilon(1e-14));
        REQUIRE(at0.imag() == 0.0);
    }
}

TEST_CASE("sphere S^3 spectrum: orders and small-angle kernel limit",
          "[cross_section]") {
    auto cs = build_spectrum(SphereZeroPotential{3, 16});
    REQUIRE(cs.n == 4);
    REQUIRE(cs.beta == 1.0);
    REQUIRE(cs.volume == Approx(2.0 * pi * pi));
    for (std::size_t l = 0; l < 8; ++l) {
        REQUIRE(cs.modes[l].nu == Approx(static_cast<double>(l) + 1.0));
        REQUIRE(cs.modes[l].multiplicity == (l + 1.0) * (l + 1.0));
    }
    // Taylor branch at tiny sigma agrees with the sin-ratio formula nearby
    const auto& m5 = cs.modes[5];
    const double direct = 6.0 * std::sin(6.0 * 0.01) /
                          (2.0 * pi * pi * std::sin(0.01));
    REQUIRE(m5.addition_kernel(0.01).real() == Approx(direct).epsilon(1e-10));
    REQUIRE(m5.addition_kernel(1e-10).real() ==
            Approx(36.0 / (2.0 * pi * pi)).epsilon(1e-12));
}

TEST_CASE("addition kernels integrate to multiplicity orthogonality",
          "[cross_section]") {
    // integral of aK_l over Y is 1 for l = 0 and 0 for l >= 1
    for (int dim : {2, 3}) {
        auto cs = build_spectrum(SphereZeroPotential{dim, 8});
        for (std::size_t l = 0; l < 6; ++l) {
            auto f = [&](double s) {
                return cs.modes[l].addition_kernel(s).real() *
                       cs.measure_density(s);
            };
            const auto est =
                quad::with_refinement(f, quad::uniform_panels(0.0, pi, 0.1));
            const double expect = (l == 0) ? 1.0 : 0.0;
            REQUIRE(est.value == Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("circle with flux: mode ordering and coincidence value",
          "[cross_section]") {
    auto cs = build_spectrum(CircleAharonovBohm{0.3, 8});
    REQUIRE(cs.n == 2);
    REQUIRE(cs.modes.size() == 17);
    REQUIRE(cs.modes[0].nu == Approx(0.3));
    REQUIRE(cs.modes[1].nu == Approx(0.7));
    REQUIRE(cs.modes[2].nu == Approx(1.3));
    for (std::size_t j = 0; j + 1 < cs.modes.size(); ++j)
        REQUIRE(cs.modes[j].nu <= cs.modes[j + 1].nu);
    // sum of all kernels at u = 0 is (number of modes) / (2 pi)
    complex_t at0{0.0, 0.0};
    for (const auto& m : cs.modes) at0 += m.addition_kernel(0.0);
    REQUIRE(at0.real() == Approx(17.0 / (2.0 * pi)).epsilon(1e-13));
    REQUIRE(at0.imag() == Approx(0.0).margin(1e-15));
}

TEST_CASE("circle damped row norm matches the frozen reference",
          "[cross_section]") {
    // integral over the circle of |sum_k e^{-h nu_k} e^{i k u} / 2 pi| at
    // h = 0.5, flux 0.3, truncation |k| <= 8
    auto cs = build_spectrum(CircleAharonovBohm{0.3, 8});
    const double h = 0.5;
    const auto est = schur_norm_star(
        cs, [&](double nu) { return std::exp(-h * nu); }, h);
    REQUIRE(est.value == Approx(0.87803991413292380189).epsilon(1e-11));
    REQUIRE(est.error < 1e-10);
}

TEST_CASE("half-integer orders annihilate the pi-weighted damped kernel",
          "[cross_section]") {
    // On S^2 every nu_l = l + 1/2, so cos(pi nu_l) vanishes identically and
    // the damped sum is exactly zero, term by term.
    auto cs = build_spectrum(SphereZeroPotential{2, 64});
    for (double h : {0.1, 0.7, 3.0}) {
        for (double sigma : {0.3, 1.5, 2.9}) {
            const auto v = damped_cos_pi_kernel(cs, h, sigma);
            REQUIRE(v.real() == 0.0);
            REQUIRE(v.imag() == 0.0);
        }
    }
}

TEST_CASE("shifted sphere damped kernel matches the Poisson closed form",
          "[cross_section]") {
    auto cs = make_shifted_sphere2(0.3, 64);
    for (double h : {1.5, 0.5}) {
        for (double sigma : {0.4, 1.3, 2.6}) {
            const auto v = damped_cos_pi_kernel(cs, h, sigma);
            REQUIRE(v.imag() == 0.0);
            REQUIRE(v.real() ==
                    Approx(shifted_sphere_closed(h, sigma)).epsilon(1e-10));
        }
    }
}

TEST_CASE("shifted sphere row norm equals |cos(0.8 pi)| e^{-0.8 h}",
          "[cross_section]") {
    // The Poisson factor is positive and integrates to one over the sphere,
    // so the row norm of the damped kernel is the prefactor exactly.
    auto cs = make_shifted_sphere2(0.3, 64);
    for (double h : {1.0, 0.25, 0.05}) {
        const auto est = damped_norm_star(cs, h);
        const double expect = std::abs(std::cos(0.8 * pi)) * std::exp(-0.8 * h);
        REQUIRE(est.value == Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("explicit sampled spectrum reproduces the built-in sphere",
          "[cross_section]") {
    ExplicitSpectrum ex;
    ex.n = 3;
    ex.volume = 4.0 * pi;
    ex.sigma_max = pi;
    const int samples = 801;
    for (int l = 0; l <= 4; ++l) {
        ExplicitMode m;
        m.lambda = l * (l + 1.0);
        m.multiplicity = 2.0 * l + 1.0;
        for (int i = 0; i < samples; ++i) {
            const double s = pi * i / (samples - 1.0);
            const auto p = specfun::legendre_pl_batch(l, std::cos(s));
            m.sigma.push_back(s);
            m.value.push_back((2.0 * l + 1.0) / (4.0 * pi) *
                              p[static_cast<std::size_t>(l)]);
        }
        ex.modes.push_back(std::move(m));
    }
    auto built = build_spectrum(CrossSectionSpec{ex});
    auto ref = build_spectrum(SphereZeroPotential{2, 8});
    REQUIRE(built.measure_density(1.0) == Approx(2.0 * pi * std::sin(1.0)));
    for (double sigma : {0.5, 1.7}) {
        const auto a = cos_mode_kernel(built, 0.9, sigma);
        const auto b = cos_mode_kernel(ref, 0.9, sigma, 0.0, 5);
        REQUIRE(a.real() == Approx(b.real()).margin(1e-6));
    }
}

TEST_CASE("spectrum text format parses and validates", "[cross_section]") {
    std::istringstream good(
        "# toy two-mode spectrum\n"
        "n 3\n"
        "volume 12.566370614359172\n"
        "sigma-max 3.141592653589793\n"
        "mode 0 1\n"
        "table 0 0.0795774715459477\n"
        "table 1.6 0.0795774715459477\n"
        "table 3.141592653589793 0.0795774715459477\n"
        "mode 2 3\n"
        "table 0 0.2387324146378430\n"
        "table 1.6 -0.0069344611\n"
        "table 3.141592653589793 -0.2387324146378430\n");
    auto ex = parse_spectrum_file(good);
    REQUIRE(ex.n == 3);
    REQUIRE(ex.modes.size() == 2);
    REQUIRE(ex.modes[1].multiplicity == 3.0);
    REQUIRE(ex.modes[1].sigma.size() == 3);
    auto cs = build_spectrum(CrossSectionSpec{ex});
    REQUIRE(cs.modes[1].nu == Approx(1.5));

    std::istringstream bad_key("n 3\nwibble 4\n");
    REQUIRE_THROWS_AS(parse_spectrum_file(bad_key), ConfigError);
    std::istringstream orphan_table("n 3\ntable 0 1\n");
    REQUIRE_THROWS_AS(parse_spectrum_file(orphan_table), ConfigError);
    try {
        std::istringstream again("n 3\nwibble 4\n");
        parse_spectrum_file(again);
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("spectrum construction rejects bad input", "[cross_section]") {
    REQUIRE_THROWS_AS(build_spectrum(SphereZeroPotential{4, 8}),
                      UnsupportedCrossSection);
    REQUIRE_THROWS_AS(build_spectrum(CircleAharonovBohm{1.2, 8}), ConfigError);
    ExplicitSpectrum ex;
    ex.n = 3;
    ex.volume = 1.0;
    ExplicitMode a, b;
    a.lambda = 2.0;
    a.sigma = {0.0, 1.0};
    a.value = {1.0, 1.0};
    b = a;
    b.lambda = 1.0;  // out of order
    ex.modes = {a, b};
    REQUIRE_THROWS_AS(build_spectrum(CrossSectionSpec{ex}), ConfigError);
    auto sphere = build_spectrum(SphereZeroPotential{2, 4});
    REQUIRE_THROWS_AS(damped_cos_pi_kernel(sphere, 0.0, 1.0), ConfigError);
}

TEST_CASE("lazy generator extends the sphere spectrum on demand",
          "[cross_section]") {
    auto cs = build_spectrum(SphereZeroPotential{2, 4});
    REQUIRE(cs.modes.size() == 4);
    REQUIRE(cs.ensure_modes(300) == 300);
    REQUIRE(cs.modes[299].nu == Approx(299.5));
    // mollified cosine kernel with a single mode is just aK_0
    const auto v = cos_mode_kernel(cs, 0.4, 1.0, 50.0, 1);
    REQUIRE(v.real() ==
            Approx(std::cos(0.4 * 0.5) * std::exp(-1e-4) / (4.0 * pi))
                .epsilon(1e-12));
}
