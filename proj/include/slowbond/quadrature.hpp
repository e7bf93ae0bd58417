#pragma once

// Quadrature and interpolation helpers for the semigroup module: adaptive
// Gauss-Kronrod (Boost.Math) with explicit breakpoints, and a clamped cubic
// spline on uniform grids (end slopes from one-sided 4-point differences, so
// interpolation stays O(h^4) up to the ends).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace slowbond {

inline constexpr double kQuadTol = 1e-10;

template <class F>
double integrate_gk(F&& f, double a, double b, double tol = kQuadTol, unsigned max_depth = 7) {
    if (!(b > a)) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double error = 0.0;
    const double v = GK::integrate(std::forward<F>(f), a, b, max_depth, tol, &error);
    // the error is an estimate; gate on genuine breakdown, not estimator noise
    if (!(error <= std::max(50.0 * tol, 1e-8 + 1e-7 * std::abs(v))))
        throw std::runtime_error("integrate_gk: quadrature did not converge, error " +
                                 std::to_string(error));
    return v;
}

// Integral over [pts.front(), pts.back()] split at interior breakpoints
// (kinks, kernel peaks).  Breakpoints need not be sorted or distinct.
template <class F>
double integrate_pieces(F&& f, std::vector<double> pts, double tol = kQuadTol,
                        unsigned max_depth = 7) {
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (pts[i + 1] > pts[i]) acc += integrate_gk(f, pts[i], pts[i + 1], tol, max_depth);
    return acc;
}

class CubicSpline {
  public:
    CubicSpline() = default;

    // Uniform grid x_j = x0 + j h, clamped ends.
    CubicSpline(double x0, double h, std::vector<double> values) : x0_(x0), h_(h) {
        const std::size_t n = values.size();
        if (n < 5) throw std::invalid_argument("CubicSpline: need at least 5 nodes");
        y_ = std::move(values);
        // one-sided 4-point end derivatives
        const double d0 =
            (-11.0 * y_[0] + 18.0 * y_[1] - 9.0 * y_[2] + 2.0 * y_[3]) / (6.0 * h_);
        const double dn = (11.0 * y_[n - 1] - 18.0 * y_[n - 2] + 9.0 * y_[n - 3] -
                           2.0 * y_[n - 4]) /
                          (6.0 * h_);
        // tridiagonal system for interior derivatives (Hermite form)
        std::vector<double> a(n, 1.0), b(n, 4.0), c(n, 1.0), r(n);
        m_.assign(n, 0.0);
        b[0] = b[n - 1] = 1.0;
        a[0] = c[0] = a[n - 1] = c[n - 1] = 0.0;
        r[0] = d0;
        r[n - 1] = dn;
        for (std::size_t i = 1; i + 1 < n; ++i) r[i] = 3.0 * (y_[i + 1] - y_[i - 1]) / h_;
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        m_[n - 1] = r[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
    }

    bool empty() const { return y_.empty(); }
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * static_cast<double>(y_.size() - 1); }

    // Evaluates with clamping to the grid range.
    double operator()(double x) const {
        const std::size_t n = y_.size();
        double s = (x - x0_) / h_;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        auto j = static_cast<std::size_t>(s);
        if (j >= n - 1) j = n - 2;
        const double u = s - static_cast<double>(j);
        const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        const double h10 = u * (1.0 - u) * (1.0 - u);
        const double h01 = u * u * (3.0 - 2.0 * u);
        const double h11 = u * u * (u - 1.0);
        return h00 * y_[j] + h10 * h_ * m_[j] + h01 * y_[j + 1] + h11 * h_ * m_[j + 1];
    }

    std::size_t segments() const { return y_.size() - 1; }
    double node(std::size_t j) const { return x0_ + h_ * static_cast<double>(j); }
    double h() const { return h_; }
    double value_at_node(std::size_t j) const { return y_[j]; }

    // power-basis coefficients around node j: S(x) = sum beta_r (x - x_j)^r
    std::array<double, 4> segment_coeffs(std::size_t j) const {
        const double dy = y_[j + 1] - y_[j];
        const double c2 = 3.0 * dy - h_ * (2.0 * m_[j] + m_[j + 1]);
        const double c3 = -2.0 * dy + h_ * (m_[j] + m_[j + 1]);
        return {y_[j], m_[j], c2 / (h_ * h_), c3 / (h_ * h_ * h_)};
    }

  private:
    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;  // nodal derivatives
};

// int_{max(base, x_min)}^{min(upper, x_max)} e^{-c (x - base)} S(x) dx, exact
// per spline segment (antiderivative of exp x cubic).  With upper = +inf a
// clamped constant tail S(x_max) e^{-c(...)}/c is appended.
inline double exp_weighted_spline_integral(const CubicSpline& s, double base, double c,
                                           double upper =
                                               std::numeric_limits<double>::infinity()) {
    if (!(c > 0.0)) throw std::invalid_argument("exp_weighted_spline_integral: c must be > 0");
    const double zmax = s.x_max();
    const double lo = std::max(base, s.x_min());
    const double hi = std::min(upper, zmax);
    if (lo >= hi) {
        if (std::isfinite(upper)) return 0.0;
        const double w0 = std::exp(-c * std::max(lo - base, 0.0));
        return s(zmax) * w0 / c;
    }

    double total = 0.0;
    const auto eval_F = [c, base](const std::array<double, 4>& b, double xj, double x) {
        const double d = x - xj;
        const double p0 = b[0] + d * (b[1] + d * (b[2] + d * b[3]));
        const double p1 = b[1] + d * (2.0 * b[2] + 3.0 * d * b[3]);
        const double p2 = 2.0 * b[2] + 6.0 * d * b[3];
        const double p3 = 6.0 * b[3];
        return -std::exp(-c * (x - base)) *
               (p0 / c + p1 / (c * c) + p2 / (c * c * c) + p3 / (c * c * c * c));
    };
    const auto j_begin = static_cast<std::size_t>(
        std::clamp((lo - s.x_min()) / s.h(), 0.0, static_cast<double>(s.segments() - 1)));
    for (std::size_t j = j_begin; j < s.segments(); ++j) {
        const double xj = s.node(j);
        const double a = std::max(xj, lo);
        const double b = std::min(s.node(j + 1), hi);
        if (a >= hi) break;
        if (b <= a) continue;  // empty sliver when base sits on a node boundary
        if (c * (a - base) > 45.0) return total;  // weight underflowed
        const auto coef = s.segment_coeffs(j);
        total += eval_F(coef, xj, b) - eval_F(coef, xj, a);
    }
    if (!std::isfinite(upper))
        total += s(zmax) * std::exp(-c * (zmax - base)) / c;  // clamped tail
    return total;
}

}  // namespace slowbond
