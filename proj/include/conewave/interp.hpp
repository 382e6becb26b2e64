/**
 * @file interp.hpp
 * @brief Small interpolation utilities: C^1 cubic Hermite tables on arbitrary
 *        sorted grids and Chebyshev interpolants with differentiation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "conewave/common.hpp"

namespace conewave::interp {

/// Piecewise-cubic Hermite interpolant with three-point finite-difference
/// slopes.  C^1, local, and does not overshoot badly on smooth monotone data.
class CubicHermite {
  public:
    CubicHermite() = default;
    CubicHermite(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.size() < 2)
            throw ConfigError("CubicHermite: need >= 2 matching samples");
        for (std::size_t i = 0; i + 1 < x_.size(); ++i)
            if (!(x_[i] < x_[i + 1]))
                throw ConfigError("CubicHermite: abscissas must increase");
        slopes_.resize(x_.size());
        const std::size_t n = x_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0) {
                slopes_[i] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
            } else if (i + 1 == n) {
                slopes_[i] = (y_[n - 1] - y_[n - 2]) / (x_[n - 1] - x_[n - 2]);
            } else {
                const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
                const double dl = (y_[i] - y_[i - 1]) / hl;
                const double dr = (y_[i + 1] - y_[i]) / hr;
                slopes_[i] = (hr * dl + hl * dr) / (hl + hr);
            }
        }
    }

    double operator()(double x) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = (it == x_.begin())
                            ? 0
                            : static_cast<std::size_t>(it - x_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i];
        const double u = (x - x_[i]) / h;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * y_[i] + (u3 - 2 * u2 + u) * h * slopes_[i] +
               (-2 * u3 + 3 * u2) * y_[i + 1] + (u3 - u2) * h * slopes_[i + 1];
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

  private:
    std::vector<double> x_, y_;
    std::vector<double> slopes_;
};

/// Chebyshev interpolant of a smooth function on [a,b] with spectral
/// differentiation, used for radial profiles whose derivatives feed
/// second-order operators.
class Chebyshev {
  public:
    Chebyshev() = default;
    Chebyshev(const std::function<double(double)>& f, double a, double b, int n)
        : a_(a), b_(b), c_(static_cast<std::size_t>(n) + 1) {
        const std::size_t N = c_.size();
        std::vector<double> fv(N);
        for (std::size_t k = 0; k < N; ++k) {
            const double xk = std::cos(pi * (k + 0.5) / static_cast<double>(N));
            fv[k] = f(map_from_unit(xk));
        }
        for (std::size_t j = 0; j < N; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < N; ++k)
                s += fv[k] * std::cos(pi * j * (k + 0.5) / static_cast<double>(N));
            c_[j] = 2.0 * s / static_cast<double>(N);
        }
        c_[0] *= 0.5;
    }

    double operator()(double x) const { return eval(c_, to_unit(x)); }

    /// Interpolant of the derivative (exact differentiation of the series).
    Chebyshev derivative() const {
        Chebyshev d;
        d.a_ = a_;
        d.b_ = b_;
        const std::size_t N = c_.size();
        d.c_.assign(N, 0.0);
        if (N >= 2) {
            std::vector<double> dc(N + 1, 0.0);
            for (std::size_t j = N - 1; j >= 1; --j) {
                dc[j - 1] = dc[j + 1] + 2.0 * static_cast<double>(j) * c_[j];
                if (j == 1) break;
            }
            dc[0] *= 0.5;
            const double scale = 2.0 / (b_ - a_);
            for (std::size_t j = 0; j < N; ++j) d.c_[j] = dc[j] * scale;
        }
        return d;
    }

  private:
    static double eval(const std::vector<double>& c, double t) {
        // Clenshaw recurrence
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t j = c.size(); j-- > 1;) {
            const double b0 = 2.0 * t * b1 - b2 + c[j];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }
    double to_unit(double x) const { return (2.0 * x - a_ - b_) / (b_ - a_); }
    double map_from_unit(double t) const { return 0.5 * ((b_ - a_) * t + a_ + b_); }

    double a_ = -1.0, b_ = 1.0;
    std::vector<double> c_;
};

}  // namespace conewave::interp
