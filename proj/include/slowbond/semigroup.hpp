#pragma once

// Evaluation of the Robin heat semigroup T_t^alpha.
//
// With g = g_even + g_odd per branch (u > 0 / u < 0),
//
//   T_t g(u) = (4 pi t)^{-1/2} { E-term(u)  +/-  e^{+-2 alpha u} *
//                int_{|u|}^{inf} e^{-2 alpha z} I(z) dz },
//   I(z) = int_0^inf [ ((z-y+4at)/2t) e^{-(z-y)^2/4t}
//                    + ((z+y-4at)/2t) e^{-(z+y)^2/4t} ] g_odd(y) dy.
//
// Two numerical devices:
//   * the z-integral is computed through zeta = e^{-2 alpha (z-|u|)}, which
//     cancels the outer e^{+-2 alpha u} exactly, so nothing ever overflows
//     and the odd term reduces to a bounded integral over (0,1];
//   * I(z) is either evaluated directly (windowed Gauss-Kronrod around the
//     two kernel centres) or served from a clamped cubic spline cache whose
//     spacing scales with sqrt(4t).
//
// The derivative in u comes from the same pieces:
//   d/du T_t g = (4 pi t)^{-1/2} [ E'-term + Iint(|u|) - I(|u|) ],
// identical from both sides, which is the Robin condition built in.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slowbond/profiles.hpp"
#include "slowbond/quadrature.hpp"
#include "slowbond/test_function.hpp"

namespace slowbond {

// Bounded piecewise-smooth initial data with at most a jump/kink at 0.
// decay_radius = +inf marks non-decaying data (density profiles).
struct PiecewiseFn {
    std::function<double(double u, bool right_side)> eval;
    double decay_radius = std::numeric_limits<double>::infinity();
    double feature_scale = 1.0;  // narrowest structure in the data
    // finite for sampled data (spline cell size): quadrature panels shrink to
    // a few cells so the error estimator is not fooled by C^2 roughness
    double quad_grain = std::numeric_limits<double>::infinity();

    double operator()(double u) const { return eval(u, u > 0.0); }
    double even_part(double y) const { return 0.5 * (eval(y, y > 0.0) + eval(-y, y < 0.0)); }
    double odd_part(double y) const { return 0.5 * (eval(y, y > 0.0) - eval(-y, y < 0.0)); }
};

inline PiecewiseFn as_piecewise(const TestFunction& f) {
    PiecewiseFn p;
    p.eval = [&f](double u, bool rs) { return f.derivative_value(0, u, rs); };
    p.decay_radius = f.decay_radius(1e-17);
    p.feature_scale = f.min_width();
    return p;
}

inline PiecewiseFn as_piecewise(const InitialProfile& rho) {
    PiecewiseFn p;
    p.eval = [&rho](double u, bool rs) {
        if (u == 0.0) return rho(rs ? 1e-300 : 0.0);  // side limits of the step convention
        return rho(u);
    };
    return p;
}

class RobinSemigroup {
  public:
    RobinSemigroup(PiecewiseFn g, double t, double alpha, double tol = 1e-9)
        : g_(std::move(g)), t_(t), alpha_(alpha), tol_(tol) {
        if (!(t > 0.0)) throw std::invalid_argument("RobinSemigroup: t must be > 0");
        if (!(alpha > 0.0)) throw std::invalid_argument("RobinSemigroup: alpha must be > 0");
        sq4t_ = std::sqrt(4.0 * t_);
        kernel_halfwidth_ = 11.0 * sq4t_ + 4.0 * alpha_ * t_;
        if (std::isfinite(g_.decay_radius))
            z_cap_ = g_.decay_radius + kernel_halfwidth_;
        else
            z_cap_ = kernel_halfwidth_ + 14.0 * sq4t_;
        build_cache();
    }

    double time() const { return t_; }

    double value(double u) const { return value_side(u, u > 0.0); }

    double value_side(double u, bool right_side) const {
        const double even = even_term(u);
        const bool right = (u == 0.0) ? right_side : (u > 0.0);
        const double odd = pref() / (2.0 * alpha_) * zeta_integral(std::abs(u));
        return even + (right ? odd : -odd);
    }

    double derivative(double u) const {
        const double base = std::abs(u);
        return even_deriv_term(u) + pref() * (zeta_integral(base) - I_of(base));
    }

    double jump() const { return value_side(0.0, true) - value_side(0.0, false); }

    // Robin residual d_u T_t g(0+) - alpha [T_t g(0+) - T_t g(0-)]
    double robin_residual() const { return derivative(0.0) - alpha_ * jump(); }

    // I(z) from the spline cache (clamped beyond the cap)
    double I_cached(double z) const { return I_of(z); }
    double zeta_debug(double base) const { return zeta_integral(base); }
    double fine_boundary_debug() const { return z_fine_; }

    // I(z) evaluated directly; the cache accuracy oracle.  Windows are cut
    // into ~3-sigma panels so each Gauss-Kronrod call sees a mild integrand.
    double I_direct(double z) const {
        const double w = kernel_halfwidth_;
        const double panel = std::min(3.0 * std::sqrt(2.0 * t_), 8.0 * g_.quad_grain);
        double acc = 0.0;
        // K1: kernel centred at y = z
        {
            double lo = std::max(0.0, z - w);
            double hi = z + w;
            if (std::isfinite(g_.decay_radius)) hi = std::min(hi, g_.decay_radius);
            if (hi > lo)
                acc += integrate_pieces([this, z](double y) { return k1(z, y) * g_.odd_part(y); },
                                        panel_points(lo, hi, z, panel), tol_);
        }
        // K2: kernel centred at y = -z, decaying over y >= 0
        {
            double hi = w - z;
            if (std::isfinite(g_.decay_radius)) hi = std::min(hi, g_.decay_radius);
            if (hi > 0.0)
                acc += integrate_pieces([this, z](double y) { return k2(z, y) * g_.odd_part(y); },
                                        panel_points(0.0, hi, 0.0, panel), tol_);
        }
        return acc;
    }

  private:
    double pref() const { return 1.0 / std::sqrt(4.0 * 3.14159265358979323846 * t_); }

    double k1(double z, double y) const {
        const double d = z - y;
        return (d + 4.0 * alpha_ * t_) / (2.0 * t_) * std::exp(-d * d / (4.0 * t_));
    }
    double k2(double z, double y) const {
        const double s = z + y;
        return (s - 4.0 * alpha_ * t_) / (2.0 * t_) * std::exp(-s * s / (4.0 * t_));
    }

    static std::vector<double> panel_points(double lo, double hi, double anchor, double panel) {
        std::vector<double> pts{lo, hi};
        for (double y = anchor; y > lo; y -= panel) pts.push_back(std::max(y, lo));
        for (double y = anchor + panel; y < hi; y += panel) pts.push_back(y);
        return pts;
    }

    // I has a boundary layer of width ~ sqrt(4t) near z = 0 (the y >= 0 cut)
    // and varies on the data's own scale beyond it; cache it with a fine
    // spline on the layer and a coarse one after.
    void build_cache() {
        // spline error scales like (h / scale)^4 / 384; widen the spacing
        // when a loose tolerance was requested
        const double coarsen = std::clamp(std::pow(tol_ / 1e-9, 0.25), 1.0, 8.0);
        const double hf = sq4t_ / 32.0 * coarsen;
        z_fine_ = std::min(z_cap_, 16.0 * sq4t_ + 4.0 * alpha_ * t_);
        {
            const auto nodes = static_cast<std::size_t>(std::ceil(z_fine_ / hf)) + 1;
            std::vector<double> vals(std::max<std::size_t>(nodes, 6));
            for (std::size_t j = 0; j < vals.size(); ++j)
                vals[j] = I_direct(static_cast<double>(j) * hf);
            z_fine_ = hf * static_cast<double>(vals.size() - 1);
            fine_ = CubicSpline(0.0, hf, std::move(vals));
        }
        if (z_cap_ > z_fine_ + sq4t_) {
            const double hc =
                std::max(hf, std::min(g_.feature_scale, 1.0) / 32.0 * coarsen);
            const auto nodes =
                static_cast<std::size_t>(std::ceil((z_cap_ - z_fine_) / hc)) + 1;
            std::vector<double> vals(std::max<std::size_t>(nodes, 6));
            for (std::size_t j = 0; j < vals.size(); ++j)
                vals[j] = I_direct(z_fine_ + static_cast<double>(j) * hc);
            coarse_ = CubicSpline(z_fine_, hc, std::move(vals));
        }
        z_cap_ = coarse_.empty() ? z_fine_ : coarse_.x_max();
    }

    double I_of(double z) const {
        if (z >= z_cap_) z = z_cap_;  // beyond the cap I is constant to rounding
        if (z <= z_fine_ || coarse_.empty()) return fine_(z);
        return coarse_(z);
    }

    // int_0^1 I(base - ln(zeta)/(2 alpha)) d zeta
    //   = 2 alpha int_base^inf e^{-2 alpha (z - base)} I(z) dz,
    // evaluated in closed form segment by segment over the spline (adaptive
    // rules estimate badly on piecewise-cubic data).
    double zeta_integral(double base) const {
        const double c = 2.0 * alpha_;
        if (coarse_.empty()) return c * exp_weighted_spline_integral(fine_, base, c);
        return c * (exp_weighted_spline_integral(fine_, base, c, z_fine_) +
                    exp_weighted_spline_integral(coarse_, base, c));
    }

    // (4 pi t)^{-1/2} int e^{-(u-y)^2/4t} g_even(y) dy via y = u + sqrt(4t) v
    double even_term(double u) const {
        const double kink = std::clamp(-u / sq4t_, -8.75, 8.75);
        return (1.0 / std::sqrt(3.14159265358979323846)) *
               integrate_pieces(
                   [this, u](double v) {
                       return std::exp(-v * v) * g_.even_part(u + sq4t_ * v);
                   },
                   {-8.75, kink, 8.75}, tol_);
    }

    double even_deriv_term(double u) const {
        const double kink = std::clamp(-u / sq4t_, -8.75, 8.75);
        const double inv_sqrt_t = 1.0 / std::sqrt(t_);
        return (1.0 / std::sqrt(3.14159265358979323846)) *
               integrate_pieces(
                   [this, u, inv_sqrt_t](double v) {
                       return std::exp(-v * v) * v * inv_sqrt_t *
                              g_.even_part(u + sq4t_ * v);
                   },
                   {-8.75, kink, 8.75}, tol_);
    }

    PiecewiseFn g_;
    double t_;
    double alpha_;
    double tol_;
    double sq4t_ = 0.0;
    double kernel_halfwidth_ = 0.0;
    double z_cap_ = 0.0;
    double z_fine_ = 0.0;
    CubicSpline fine_, coarse_;
};

// Spec-level operation: T_t g (u), t = 0 returning g(u).
inline double apply_semigroup(const TestFunction& g, double t, double u, double alpha) {
    if (t == 0.0) return g.value(u);
    return RobinSemigroup(as_piecewise(g), t, alpha).value(u);
}

// Pointwise-tabulated piecewise function (two clamped splines, side limits at
// the origin kept distinct); used to feed a semigroup output back in.
class TabulatedPiecewise {
  public:
    TabulatedPiecewise(const std::function<double(double, bool)>& f, double radius, double h) {
        const auto n = static_cast<std::size_t>(std::ceil(radius / h)) + 1;
        std::vector<double> right(std::max<std::size_t>(n, 6)), left(right.size());
        for (std::size_t j = 0; j < right.size(); ++j) {
            const double u = static_cast<double>(j) * h;
            right[j] = f(u, true);
            left[j] = f(-u, false);
        }
        radius_ = h * static_cast<double>(right.size() - 1);
        right_ = CubicSpline(0.0, h, std::move(right));
        left_ = CubicSpline(0.0, h, std::move(left));
    }

    PiecewiseFn piecewise() const {
        PiecewiseFn p;
        p.eval = [this](double u, bool rs) {
            if (std::abs(u) > radius_) return 0.0;
            if (u == 0.0) return rs ? right_(0.0) : left_(0.0);
            return u > 0.0 ? right_(u) : left_(-u);
        };
        p.decay_radius = radius_;
        p.quad_grain = right_.h();
        return p;
    }

  private:
    double radius_ = 0.0;
    CubicSpline left_, right_;
};

// max over probe points of |T_{t+s} g - T_t (T_s g)|
inline double semigroup_property_check(const TestFunction& g, double s, double t,
                                       const std::vector<double>& probes) {
    if (!(s >= 0.0) || !(t > 0.0))
        throw std::invalid_argument("semigroup_property_check: need s >= 0, t > 0");
    const PiecewiseFn pg = as_piecewise(g);
    const RobinSemigroup direct(pg, s + t, g.alpha());
    if (s == 0.0) {
        const RobinSemigroup inner0(pg, t, g.alpha());
        double m = 0.0;
        for (double u : probes) m = std::max(m, std::abs(direct.value(u) - inner0.value(u)));
        return m;
    }
    const RobinSemigroup inner(pg, s, g.alpha());
    const double radius = pg.decay_radius + 16.0 * std::sqrt(s + t) + 2.0;
    const TabulatedPiecewise tab(
        [&inner](double u, bool rs) { return inner.value_side(u, rs); }, radius,
        std::min(0.01, std::sqrt(4.0 * s) / 64.0));
    const RobinSemigroup composed(tab.piecewise(), t, g.alpha(), 1e-7);
    double m = 0.0;
    for (double u : probes) m = std::max(m, std::abs(direct.value(u) - composed.value(u)));
    return m;
}

// Macroscopic density rho(t, u) = (T_t rho_0)(u), with side limits at the
// origin and a per-time spline cache.  Constant profiles short-circuit.
class MacroProfile {
  public:
    MacroProfile(InitialProfile rho0, double alpha)
        : rho0_(std::move(rho0)), alpha_(alpha) {
        if (rho0_.name() == "constant") const_value_ = rho0_(0.0);
    }

    const InitialProfile& initial() const { return rho0_; }
    double alpha() const { return alpha_; }
    std::optional<double> constant_value() const { return const_value_; }

    struct Slice {
        std::function<double(double)> value;
        double left0 = 0.0;
        double right0 = 0.0;
        double time = 0.0;
    };

    // Density at a fixed time; t = 0 returns the profile itself.
    Slice at_time(double t) const {
        Slice s;
        s.time = t;
        if (const_value_) {
            const double c = *const_value_;
            s.value = [c](double) { return c; };
            s.left0 = s.right0 = c;
            return s;
        }
        if (t == 0.0) {
            const InitialProfile& r = rho0_;
            s.value = [r](double u) { return r(u); };
            s.left0 = rho0_(0.0);
            s.right0 = rho0_(1e-300);
            return s;
        }
        auto sg = std::make_shared<RobinSemigroup>(as_piecewise(rho0_), t, alpha_, 1e-8);
        const double radius = 10.0 + 16.0 * std::sqrt(t);
        auto tab = std::make_shared<TabulatedPiecewise>(
            [&sg](double u, bool rs) { return sg->value_side(u, rs); }, radius,
            std::min(0.04, std::sqrt(4.0 * t) / 16.0));
        const InitialProfile r = rho0_;
        auto pw = tab->piecewise();
        s.value = [tab, pw, r, radius](double u) {
            // beyond the disturbed region the density is still the profile
            if (std::abs(u) > radius - 1.0) return r(u);
            return std::clamp(pw(u), 0.0, 1.0);
        };
        s.left0 = std::clamp(pw.eval(0.0, false), 0.0, 1.0);
        s.right0 = std::clamp(pw.eval(0.0, true), 0.0, 1.0);
        return s;
    }

  private:
    InitialProfile rho0_;
    double alpha_;
    std::optional<double> const_value_;
};

// Spec-level operation: pointwise solution of the Robin heat equation.
inline double solve_macroscopic(const InitialProfile& rho0, double t, double u, double alpha) {
    if (t == 0.0) return rho0(u);
    return RobinSemigroup(as_piecewise(rho0), t, alpha).value(u);
}

}  // namespace slowbond
