/**
 * @file cross_section.hpp
 * @brief Cross-section spectra: eigenvalues, multiplicities and addition
 *        kernels of the magnetic Laplacian on the link manifold, plus the
 *        distance-kernel sums and Schur norms built from them.
 *
 * A cone over a link Y carries one radial model problem per eigenvalue of
 * (i grad + A)^2 on Y; everything downstream consumes the triple
 * (nu_j, multiplicity_j, addition kernel aK_j(sigma)) where aK_j is the
 * eigenspace reproducing kernel expressed through the distance sigma on Y.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "conewave/common.hpp"
#include "conewave/interp.hpp"
#include "conewave/quadrature.hpp"
#include "conewave/specfun.hpp"

namespace conewave::cross_section {

// ---------------------------------------------------------------------------
// spectral data
// ---------------------------------------------------------------------------

/// One eigenvalue record of the link operator.
struct ModeData {
    double lambda = 0.0;        ///< eigenvalue of (i grad + A)^2 on Y
    double nu = 0.0;            ///< sqrt(lambda + beta^2)
    double multiplicity = 1.0;  ///< eigenspace dimension
    /// Eigenspace reproducing kernel as a function of the σ coordinate
    /// (geodesic distance; signed angle for the circle).
    std::function<complex_t(double)> addition_kernel;
};

enum class Kind { Sphere2, Sphere3, Circle, Explicit };

/// Materialised spectrum of a cross-section together with the geometric data
/// needed for integrals over Y.
struct CrossSection {
    Kind kind = Kind::Explicit;
    int n = 3;              ///< cone dimension (dim Y = n - 1)
    double beta = 0.5;      ///< (n - 2) / 2
    double volume = 0.0;    ///< total measure of Y
    double sigma_min = 0.0; ///< lower end of the σ coordinate
    double sigma_max = 0.0; ///< upper end (diameter of Y)
    std::function<double(double)> measure_density;  ///< w(σ): ∫ f dμ_Y(y') = ∫ f(σ) w(σ) dσ
    std::size_t mode_cap = 1 << 16;

    std::vector<ModeData> modes;
    /// Optional lazy generator for analytic families (index -> mode).
    std::function<ModeData(std::size_t)> generator;

    /// Make at least `count` modes available (up to the cap / table size).
    /// Returns the number actually available.
    std::size_t ensure_modes(std::size_t count) {
        if (generator) {
            while (modes.size() < count && modes.size() < mode_cap)
                modes.push_back(generator(modes.size()));
        }
        return modes.size();
    }

    /// aK_j(σ) for j < count in one call.  Batched per kind because the
    /// per-mode std::function route is too slow inside quadrature loops.
    std::vector<complex_t> addition_row(double sigma, std::size_t count) const;

    /// Smallest materialisable j with nu_j * h > threshold (damped sums).
    std::size_t cut_for_decay(double h, double threshold) const {
        // nu_j grows ~ j for every family here; probe materialised modes.
        for (std::size_t j = 0; j < modes.size(); ++j)
            if (modes[j].nu * h > threshold) return j + 1;
        return modes.size();
    }
};

inline std::vector<complex_t> CrossSection::addition_row(
    double sigma, std::size_t count) const {
    std::vector<complex_t> row(std::min(count, modes.size()));
    switch (kind) {
        case Kind::Sphere2: {
            const auto p = specfun::legendre_pl_batch(
                static_cast<int>(row.size()), std::cos(sigma));
            for (std::size_t l = 0; l < row.size(); ++l)
                row[l] = (2.0 * l + 1.0) / (4.0 * pi) *
                         p[static_cast<std::size_t>(l)];
            break;
        }
        case Kind::Sphere3: {
            const double s = std::sin(sigma);
            for (std::size_t l = 0; l < row.size(); ++l) {
                const double k = static_cast<double>(l) + 1.0;
                row[l] = (std::abs(s) < 1e-8)
                             ? complex_t{k * k / (2.0 * pi * pi) *
                                             (1.0 - (k * k - 1.0) * sigma * sigma / 6.0),
                                         0.0}
                             : complex_t{k * std::sin(k * sigma) /
                                             (2.0 * pi * pi * s),
                                         0.0};
            }
            break;
        }
        default:
            for (std::size_t j = 0; j < row.size(); ++j)
                row[j] = modes[j].addition_kernel(sigma);
    }
    return row;
}

// ---------------------------------------------------------------------------
// spec variants
// ---------------------------------------------------------------------------

/// Round sphere S^dim with zero potential; dim = 2 (cones of dimension 3)
/// and dim = 3 (cones of dimension 4) are built in.
struct SphereZeroPotential {
    int dim = 2;
    std::size_t jmax = 256;
};

/// Unit circle with an Aharonov-Bohm flux alpha in (0,1); a two-dimensional
/// cone fixture (usable downstream only with the fixture flag).
struct CircleAharonovBohm {
    double alpha = 0.3;
    int kmax = 64;
};

/// Fully explicit spectrum: eigenvalues, multiplicities and sampled addition
/// kernels (plus optionally a sampled measure density).
struct ExplicitMode {
    double lambda = 0.0;
    double multiplicity = 1.0;
    std::vector<double> sigma;   ///< sample points of the kernel table
    std::vector<double> value;   ///< aK(σ) samples
};

struct ExplicitSpectrum {
    int n = 3;
    double volume = 0.0;
    double sigma_max = pi;
    std::vector<ExplicitMode> modes;
    std::vector<double> measure_sigma;  ///< optional w(σ) samples
    std::vector<double> measure_value;
};

using CrossSectionSpec =
    std::variant<SphereZeroPotential, CircleAharonovBohm, ExplicitSpectrum>;

// ---------------------------------------------------------------------------
// build_spectrum
// ---------------------------------------------------------------------------

namespace detail {

inline ModeData sphere2_mode(std::size_t l, double beta) {
    ModeData m;
    const double ld = static_cast<double>(l);
    m.lambda = ld * (ld + 1.0);
    m.nu = std::sqrt(m.lambda + beta * beta);
    m.multiplicity = 2.0 * ld + 1.0;
    m.addition_kernel = [l](double sigma) -> complex_t {
        const auto p = specfun::legendre_pl_batch(static_cast<int>(l),
                                                  std::cos(sigma));
        return {(2.0 * static_cast<double>(l) + 1.0) / (4.0 * pi) * p[l], 0.0};
    };
    return m;
}

inline ModeData sphere3_mode(std::size_t l, double beta) {
    ModeData m;
    const double ld = static_cast<double>(l);
    m.lambda = ld * (ld + 2.0);
    m.nu = std::sqrt(m.lambda + beta * beta);  // = l + 1 for beta = 1
    m.multiplicity = (ld + 1.0) * (ld + 1.0);
    m.addition_kernel = [l](double sigma) -> complex_t {
        const double k = static_cast<double>(l) + 1.0;
        const double s = std::sin(sigma);
        if (std::abs(s) < 1e-8)
            return {k * k / (2.0 * pi * pi) *
                        (1.0 - (k * k - 1.0) * sigma * sigma / 6.0),
                    0.0};
        return {k * std::sin(k * sigma) / (2.0 * pi * pi * s), 0.0};
    };
    return m;
}

}  // namespace detail

/// Build the working spectrum from a declarative spec.  Eigenvalues must be
/// sorted ascending (ConfigError otherwise); kinds outside the supported set
/// raise UnsupportedCrossSection.
inline CrossSection build_spectrum(const CrossSectionSpec& spec) {
    CrossSection cs;
    if (const auto* sp = std::get_if<SphereZeroPotential>(&spec)) {
        if (sp->dim == 2) {
            cs.kind = Kind::Sphere2;
            cs.n = 3;
            cs.beta = 0.5;
            cs.volume = 4.0 * pi;
            cs.sigma_max = pi;
            cs.measure_density = [](double s) { return 2.0 * pi * std::sin(s); };
            const double beta = cs.beta;
            cs.generator = [beta](std::size_t l) {
                return detail::sphere2_mode(l, beta);
            };
        } else if (sp->dim == 3) {
            cs.kind = Kind::Sphere3;
            cs.n = 4;
            cs.beta = 1.0;
            cs.volume = 2.0 * pi * pi;
            cs.sigma_max = pi;
            cs.measure_density = [](double s) {
                const double v = std::sin(s);
                return 4.0 * pi * v * v;
            };
            const double beta = cs.beta;
            cs.generator = [beta](std::size_t l) {
                return detail::sphere3_mode(l, beta);
            };
        } else {
            throw UnsupportedCrossSection(
                "build_spectrum: sphere cross-sections are built in for "
                "dim 2 and 3 only");
        }
        cs.ensure_modes(sp->jmax);
        return cs;
    }
    if (const auto* ab = std::get_if<CircleAharonovBohm>(&spec)) {
        if (!(ab->alpha > 0.0 && ab->alpha < 1.0))
            throw ConfigError(
                "build_spectrum: Aharonov-Bohm flux must lie in (0,1)");
        cs.kind = Kind::Circle;
        cs.n = 2;
        cs.beta = 0.0;
        cs.volume = 2.0 * pi;
        cs.sigma_min = -pi;
        cs.sigma_max = pi;
        cs.measure_density = [](double) { return 1.0; };
        // integer Fourier indices ordered by nu = |k + alpha| ascending
        std::vector<int> ks;
        for (int k = -ab->kmax; k <= ab->kmax; ++k) ks.push_back(k);
        std::sort(ks.begin(), ks.end(), [&](int p, int q) {
            return std::abs(p + ab->alpha) < std::abs(q + ab->alpha);
        });
        for (int k : ks) {
            ModeData m;
            m.nu = std::abs(k + ab->alpha);
            m.lambda = m.nu * m.nu;
            m.multiplicity = 1.0;
            m.addition_kernel = [k](double u) -> complex_t {
                return std::exp(complex_t{0.0, static_cast<double>(k) * u}) /
                       (2.0 * pi);
            };
            cs.modes.push_back(std::move(m));
        }
        return cs;
    }
    const auto& ex = std::get<ExplicitSpectrum>(spec);
    if (ex.n < 2) throw ConfigError("build_spectrum: cone dimension must be >= 2");
    if (ex.modes.empty())
        throw ConfigError("build_spectrum: explicit spectrum has no modes");
    cs.kind = Kind::Explicit;
    cs.n = ex.n;
    cs.beta = 0.5 * (ex.n - 2);
    cs.volume = ex.volume;
    cs.sigma_max = ex.sigma_max;
    for (std::size_t j = 0; j + 1 < ex.modes.size(); ++j)
        if (ex.modes[j].lambda > ex.modes[j + 1].lambda)
            throw ConfigError(
                "build_spectrum: explicit eigenvalues must be sorted "
                "ascending");
    if (!ex.measure_sigma.empty()) {
        auto table = std::make_shared<interp::CubicHermite>(ex.measure_sigma,
                                                            ex.measure_value);
        cs.measure_density = [table](double s) { return (*table)(s); };
    } else {
        // default: round-sphere density of dimension n-1 (area of S^(n-2)
        // times sin^(n-2) sigma)
        const int d = ex.n - 1;
        const double area =
            2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
        cs.measure_density = [area, d](double s) {
            return area * std::pow(std::sin(s), d - 1);
        };
    }
    for (const auto& em : ex.modes) {
        ModeData m;
        m.lambda = em.lambda;
        m.nu = std::sqrt(em.lambda + cs.beta * cs.beta);
        m.multiplicity = em.multiplicity;
        if (em.sigma.empty())
            throw ConfigError(
                "build_spectrum: explicit mode lacks a kernel table");
        auto table = std::make_shared<interp::CubicHermite>(em.sigma, em.value);
        m.addition_kernel = [table](double s) -> complex_t {
            return {(*table)(s), 0.0};
        };
        cs.modes.push_back(std::move(m));
    }
    return cs;
}

/// Test fixture: the 2-sphere family with every nu_l displaced by `shift`
/// (nu_l = l + 1/2 + shift), keeping the spherical-harmonic addition
/// kernels.  Breaks the exact half-integer damping zeros on purpose.
inline CrossSection make_shifted_sphere2(double shift, std::size_t jmax = 256) {
    CrossSection cs = build_spectrum(SphereZeroPotential{2, jmax});
    cs.generator = [shift](std::size_t l) {
        ModeData m = detail::sphere2_mode(l, 0.5);
        m.nu = static_cast<double>(l) + 0.5 + shift;
        m.lambda = m.nu * m.nu - 0.25;
        return m;
    };
    for (std::size_t l = 0; l < cs.modes.size(); ++l) {
        cs.modes[l].nu = static_cast<double>(l) + 0.5 + shift;
        cs.modes[l].lambda = cs.modes[l].nu * cs.modes[l].nu - 0.25;
    }
    return cs;
}

// ---------------------------------------------------------------------------
// distance-kernel sums
// ---------------------------------------------------------------------------

/// Sum aK_j(sigma) * coef(nu_j) over the first `count` modes (0 = all
/// materialised).  The workhorse behind the cosine and damped kernels.
template <class Coef>
complex_t mode_sum(const CrossSection& cs, double sigma, Coef&& coef,
                   std::size_t count = 0) {
    const std::size_t m = (count == 0) ? cs.modes.size()
                                       : std::min(count, cs.modes.size());
    const auto row = cs.addition_row(sigma, m);
    complex_t acc{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) acc += coef(cs.modes[j].nu) * row[j];
    return acc;
}

/**
 * @brief Cosine wave kernel on Y at propagation parameter h:
 *        sum_j cos(h nu_j) aK_j(sigma), optionally Gaussian-mollified with
 *        scale Lambda (0 disables mollification).
 */
inline complex_t cos_mode_kernel(const CrossSection& cs, double h, double sigma,
                                 double lambda_mollify = 0.0,
                                 std::size_t count = 0) {
    if (lambda_mollify > 0.0) {
        return mode_sum(
            cs, sigma,
            [&](double nu) {
                const double g = nu / lambda_mollify;
                return std::cos(h * nu) * std::exp(-g * g);
            },
            count);
    }
    return mode_sum(cs, sigma, [&](double nu) { return std::cos(h * nu); },
                    count);
}

/**
 * @brief Exponentially damped, pi-periodically weighted kernel
 *        sum_j e^(-h nu_j) cos(pi nu_j) aK_j(sigma)  for h > 0.
 *
 * The mode cut adapts to the decay e^(-h nu); if the spectrum cannot supply
 * enough modes for the requested accuracy a TruncationError is raised.
 */
inline complex_t damped_cos_pi_kernel(CrossSection& cs, double h, double sigma,
                                      double rel_tol = 1e-12) {
    if (!(h > 0.0))
        throw ConfigError("damped_cos_pi_kernel: requires h > 0");
    const double need = 40.0;  // e^-40 ~ 4e-18
    const std::size_t want =
        static_cast<std::size_t>(std::ceil(need / h)) + 4;
    const std::size_t have = cs.ensure_modes(want);
    const std::size_t cut = cs.cut_for_decay(h, need);
    if (cut >= have && have == cs.modes.size() && cs.modes.back().nu * h < need) {
        // cannot reach the decay target; estimate the dropped tail crudely
        const double tail =
            std::exp(-h * cs.modes.back().nu) * cs.modes.back().multiplicity;
        if (tail > rel_tol)
            throw TruncationError(
                "damped_cos_pi_kernel: spectrum exhausted before the damped "
                "tail fell below tolerance");
    }
    return mode_sum(
        cs, sigma,
        [&](double nu) {
            return std::exp(-h * nu) * cos_pi(complex_t{nu, 0.0}).real();
        },
        cut);
}

// ---------------------------------------------------------------------------
// Schur norms of distance kernels
// ---------------------------------------------------------------------------

namespace detail {

/// σ-breakpoints graded toward the short-distance concentration points of
/// the kernels: both ends of [0, σ_max] on spheres (σ = 0 is the diagonal,
/// σ = π the antipode where the damped kernels peak), the origin of the
/// signed coordinate on the circle.
inline std::vector<double> sigma_panels(const CrossSection& cs, double scale) {
    const double lo = cs.sigma_min, hi = cs.sigma_max;
    const double span = hi - lo;
    const double first =
        std::max(std::min(0.05 * span, scale / 3.0), span * 1e-7);
    if (cs.kind == Kind::Circle) {
        const std::vector<double> half =
            quad::geometric_panels(0.0, hi, first, 1.6);
        std::vector<double> pts;
        for (std::size_t i = half.size(); i-- > 1;) pts.push_back(-half[i]);
        for (double x : half) pts.push_back(x);
        return pts;
    }
    std::vector<double> pts =
        quad::geometric_panels(lo, 0.5 * (lo + hi), first, 1.6);
    const std::vector<double> right =
        quad::geometric_panels(0.0, 0.5 * span, first, 1.6);
    for (std::size_t i = right.size(); i-- > 1;)
        pts.push_back(hi - right[i - 1]);
    return pts;
}

}  // namespace detail

/**
 * @brief Row Schur norm sup_y ∫ |H(y,y')| dμ(y') of a distance kernel
 *        H(σ) = Σ_j coef(nu_j) aK_j(σ), computed as ∫ |H(σ)| w(σ) dσ.
 *
 * For the homogeneous cross-sections here the row and column norms agree;
 * schur_norm_costar returns the same value through the conjugated kernel.
 */
template <class Coef>
Estimate schur_norm_star(const CrossSection& cs, Coef&& coef,
                         double feature_scale, std::size_t count = 0,
                         int refine_level = 0) {
    const std::size_t m = (count == 0) ? cs.modes.size()
                                       : std::min(count, cs.modes.size());
    std::vector<complex_t> coefs(m);
    for (std::size_t j = 0; j < m; ++j) coefs[j] = coef(cs.modes[j].nu);
    auto f = [&](double sigma) {
        const auto row = cs.addition_row(sigma, m);
        complex_t acc{0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) acc += coefs[j] * row[j];
        return std::abs(acc) * cs.measure_density(sigma);
    };
    auto pts = detail::sigma_panels(cs, feature_scale);
    for (int k = 0; k < refine_level; ++k) pts = quad::refine(pts);
    return quad::with_refinement(f, pts);
}

/// Row norm of the damped kernel e^(-h nu) cos(pi nu) at parameter h.
inline Estimate damped_norm_star(CrossSection& cs, double h,
                                 double rel_tol = 1e-12, int refine_level = 0) {
    if (!(h > 0.0)) throw ConfigError("damped_norm_star: requires h > 0");
    const double need = 40.0;
    const std::size_t want = static_cast<std::size_t>(std::ceil(need / h)) + 4;
    cs.ensure_modes(want);
    const std::size_t cut = cs.cut_for_decay(h, need);
    (void)rel_tol;
    return schur_norm_star(
        cs,
        [&](double nu) {
            return std::exp(-h * nu) * cos_pi(complex_t{nu, 0.0}).real();
        },
        std::min(1.0, h), cut, refine_level);
}

/// Column Schur norm; equals the row norm for the symmetric kernels built
/// here (kept as a separate entry point for call-site clarity).
inline Estimate damped_norm_costar(CrossSection& cs, double h,
                                   double rel_tol = 1e-12,
                                   int refine_level = 0) {
    return damped_norm_star(cs, h, rel_tol, refine_level);
}

// ---------------------------------------------------------------------------
// explicit-spectrum file format
// ---------------------------------------------------------------------------

/**
 * @brief Parse the explicit-spectrum text format (see README for the grammar:
 *        `n`, `volume`, `sigma-max`, `measure`, `mode`, `table` records,
 *        `#` comments).  Unknown keys raise ConfigError with the line number.
 */
inline ExplicitSpectrum parse_spectrum_file(std::istream& in) {
    ExplicitSpectrum ex;
    std::string line;
    int lineno = 0;
    bool have_mode = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto want = [&](int k, const char* what) {
            std::vector<double> v(static_cast<std::size_t>(k));
            for (auto& x : v)
                if (!(ls >> x))
                    throw ConfigError("spectrum file line " +
                                      std::to_string(lineno) + ": " + what);
            return v;
        };
        if (key == "n") {
            ex.n = static_cast<int>(want(1, "expected dimension")[0]);
        } else if (key == "volume") {
            ex.volume = want(1, "expected volume")[0];
        } else if (key == "sigma-max") {
            ex.sigma_max = want(1, "expected sigma-max")[0];
        } else if (key == "measure") {
            const auto v = want(2, "expected sigma value");
            ex.measure_sigma.push_back(v[0]);
            ex.measure_value.push_back(v[1]);
        } else if (key == "mode") {
            const auto v = want(2, "expected lambda multiplicity");
            ExplicitMode m;
            m.lambda = v[0];
            m.multiplicity = v[1];
            ex.modes.push_back(std::move(m));
            have_mode = true;
        } else if (key == "table") {
            if (!have_mode)
                throw ConfigError("spectrum file line " +
                                  std::to_string(lineno) +
                                  ": table before first mode");
            const auto v = want(2, "expected sigma value");
            ex.modes.back().sigma.push_back(v[0]);
            ex.modes.back().value.push_back(v[1]);
        } else {
            throw ConfigError("spectrum file line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        }
    }
    return ex;
}

inline ExplicitSpectrum parse_spectrum_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spectrum file: " + path);
    return parse_spectrum_file(in);
}

}  // namespace conewave::cross_section
