#pragma once

// Integration of the two-point correlation equation
//     d/dt phi_t(x,y) = n^2 (B_n phi_t)(x,y) + g_t(x,y)
// on the truncated half plane, where the source lives on the diagonal:
//     g_t = -(grad_n^+ rho_t(x))^2  on D \ {(0,1)},
//     g_t = -(alpha/n) (grad_n^+ rho_t(0))^2  at (0,1),
// with grad_n^+ f(x) = n (f(x+1) - f(x)) supplied by the mean path.
//
// Storage: the window V cap [-L,L]^2 is the triangle with rows
// y in [-L+1, L], x in [-L, y-1].  Fields are kept in a padded square of
// stride 2L+1 so all four neighbour offsets are constant; only triangle
// cells are ever touched.  Row y = 0 and y = 1 carry the vertical slow
// edges, columns x in {0,1} (y >= 2) the horizontal ones.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "slowbond/integrators.hpp"
#include "slowbond/lattice.hpp"
#include "slowbond/mean_solver.hpp"

namespace slowbond {

struct CorrelationField {
    WindowV window;
    Field values;  // padded square, stride 2L+1
    double time = 0.0;

    std::size_t stride() const { return static_cast<std::size_t>(2 * window.L + 1); }
    std::size_t index(Site x, Site y) const {
        return static_cast<std::size_t>(y + window.L) * stride() +
               static_cast<std::size_t>(x + window.L);
    }
    double at(Site x, Site y) const {
        if (!window.contains({x, y}))
            throw std::out_of_range("CorrelationField: site outside window");
        return values[index(x, y)];
    }

    static CorrelationField zero(const WindowV& w) {
        CorrelationField f;
        f.window = w;
        f.values.assign((2 * w.L + 1) * (2 * w.L + 1), 0.0);
        return f;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        const Site L = window.L;
        for (Site y = -L + 1; y <= L; ++y)
            for (Site x = -L; x <= y - 1; ++x) fn(x, y, values[index(x, y)]);
    }

    double abs_sup() const {
        double m = 0.0;
        for_each([&m](Site, Site, double v) { m = std::max(m, std::abs(v)); });
        return m;
    }
};

// Diagonal source row: g[x+L] for the site (x, x+1), x in [-L, L-1].
inline void correlation_source_row(const MeanPath& rho, const ModelParams& p, Site L, double t,
                                   Field& out) {
    static thread_local Field grad;
    rho.gradient_row(t, grad);
    const Window1D& mw = rho.window();
    if (mw.lo > -L || mw.hi < L)
        throw std::invalid_argument("correlation_source_row: mean window too small");
    out.resize(static_cast<std::size_t>(2 * L));
    for (Site x = -L; x <= L - 1; ++x) {
        const double g = grad[static_cast<std::size_t>(x - mw.lo)];
        const double weight = (x == 0) ? p.slow_rate() : 1.0;
        out[static_cast<std::size_t>(x + L)] = -weight * g * g;
    }
}

// Point evaluation of the source (the spec-level operation).
inline double correlation_source(const MeanPath& rho, const ModelParams& p, Site x, Site y,
                                 double t) {
    if (!in_V({x, y})) throw std::invalid_argument("correlation_source: (x,y) not in V");
    if (y != x + 1) return 0.0;
    Field grad;
    rho.gradient_row(t, grad);
    const double g = grad[static_cast<std::size_t>(x - rho.window().lo)];
    const double weight = (x == 0) ? p.slow_rate() : 1.0;
    return -weight * g * g;
}

// n^2 B_n plus the diagonal source, in the padded-square layout.
class CorrelationRhs {
  public:
    CorrelationRhs(const WindowV& w, const ModelParams& p, const MeanPath* rho)
        : w_(w), p_(p), rho_(rho), stride_(static_cast<std::size_t>(2 * w.L + 1)) {
        rate_normal_ = static_cast<double>(p.n) * p.n;
        rate_slow_ = p.alpha * p.n;  // n^2 * alpha/n
        rho_bound_ = 2.0 * 4.0 * rate_normal_;
    }

    double spectral_radius_bound() const { return rho_bound_; }

    void operator()(double t, const Field& in, Field& out) const {
        if (rho_ != nullptr) correlation_source_row(*rho_, p_, w_.L, t, gsrc_);

        const Site L = w_.L;
        const auto S = static_cast<std::ptrdiff_t>(stride_);
        const double* u = in.data();
        double* o = out.data();

#pragma omp parallel for schedule(static, 1)
        for (Site y = -L + 1; y <= L; ++y) {
            const Site xmax = y - 1;
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(y + L) * S + L;
            // generic interior: all four neighbours present, all rates 1
            if (y >= -L + 2 && y <= L - 1) {
                const Site gx_lo = -L + 1;
                const Site gx_hi = xmax - 1;
                for (Site x = gx_lo; x <= gx_hi; ++x) {
                    const std::ptrdiff_t i = base + x;
                    o[i] = rate_normal_ *
                           (u[i - 1] + u[i + 1] + u[i - S] + u[i + S] - 4.0 * u[i]);
                }
            }
            // exact stencil on the exceptional sites
            const bool whole_row = (y <= -L + 1) || (y >= L) || (y == 0) || (y == 1);
            if (whole_row) {
                for (Site x = -L; x <= xmax; ++x) exact_site(u, o, x, y);
            } else {
                exact_site(u, o, -L, y);
                exact_site(u, o, xmax, y);
                if (y >= 2) {
                    if (-L < 0 && 0 < xmax) exact_site(u, o, 0, y);
                    if (-L < 1 && 1 < xmax) exact_site(u, o, 1, y);
                }
            }
            // diagonal source
            if (rho_ != nullptr) {
                const std::ptrdiff_t i = base + xmax;
                o[i] += gsrc_[static_cast<std::size_t>(xmax + L)];
            }
        }
    }

  private:
    void exact_site(const double* u, double* o, Site x, Site y) const {
        const Site L = w_.L;
        const std::ptrdiff_t S = static_cast<std::ptrdiff_t>(stride_);
        const std::ptrdiff_t i = static_cast<std::ptrdiff_t>(y + L) * S + (x + L);
        double acc = 0.0;
        // west
        if (x - 1 >= -L) {
            const double r = (x == 1 && y >= 2) ? rate_slow_ : rate_normal_;
            acc += r * (u[i - 1] - u[i]);
        }
        // east
        if (x + 1 <= y - 1) {
            const double r = (x == 0 && y >= 2) ? rate_slow_ : rate_normal_;
            acc += r * (u[i + 1] - u[i]);
        }
        // south
        if (y - 1 >= x + 1) {
            const double r = (y == 1 && x <= -1) ? rate_slow_ : rate_normal_;
            acc += r * (u[i - S] - u[i]);
        }
        // north
        if (y + 1 <= L) {
            const double r = (y == 0 && x <= -1) ? rate_slow_ : rate_normal_;
            acc += r * (u[i + S] - u[i]);
        }
        o[i] = acc;
    }

    WindowV w_;
    ModelParams p_;
    const MeanPath* rho_;
    std::size_t stride_;
    double rate_normal_ = 0.0;
    double rate_slow_ = 0.0;
    double rho_bound_ = 0.0;
    mutable Field gsrc_;
};

struct CorrelationSolveOptions {
    double dt_target = 2e-4;   // macro step for RKC; halve to verify 1e-7
    bool use_rk4 = false;      // cross-validation mode (small n only)
    double rk4_dt_factor = 0.25;
    bool track_sup = true;
};

struct CorrelationRun {
    CorrelationField field;
    double sup_abs = 0.0;      // sup over integrator steps and sites of |phi|
    double sup_time = 0.0;
};

// Solves the sourced equation from phi0 to time t.  The mean path must cover
// [0, t] in time and [-L, L] in space.
inline CorrelationRun evolve_correlation(const CorrelationField& phi0, const MeanPath& rho,
                                         const ModelParams& p, double t,
                                         const CorrelationSolveOptions& opt = {}) {
    if (t < 0.0) throw std::invalid_argument("evolve_correlation: t must be >= 0");
    if (rho.horizon() + 1e-12 < t)
        throw std::invalid_argument("evolve_correlation: mean path does not cover [0, t]");
    CorrelationRun run;
    run.field = phi0;
    if (opt.track_sup) run.sup_abs = phi0.abs_sup();
    if (t == 0.0) return run;

    const CorrelationRhs rhs(phi0.window, p, &rho);
    StepObserver obs;
    if (opt.track_sup)
        obs = [&run, &phi0](double ts, const Field& y) {
            double m = 0.0;
            const Site L = phi0.window.L;
            const std::size_t S = static_cast<std::size_t>(2 * L + 1);
#pragma omp parallel for schedule(static, 1) reduction(max : m)
            for (Site yy = -L + 1; yy <= L; ++yy) {
                const std::size_t base = static_cast<std::size_t>(yy + L) * S;
                for (Site x = -L; x <= yy - 1; ++x)
                    m = std::max(m, std::abs(y[base + static_cast<std::size_t>(x + L)]));
            }
            if (m > run.sup_abs) {
                run.sup_abs = m;
                run.sup_time = ts;
            }
        };

    const RhsFn fn = [&rhs](double ts, const Field& y, Field& out) { rhs(ts, y, out); };
    if (opt.use_rk4) {
        const double dt_target = opt.rk4_dt_factor / rhs.spectral_radius_bound();
        const auto steps = static_cast<std::size_t>(std::ceil(t / dt_target));
        rk4_integrate(fn, run.field.values, 0.0, t / static_cast<double>(steps), steps,
                      rhs.spectral_radius_bound(), obs);
    } else {
        const auto steps =
            std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(t / opt.dt_target)));
        rkc2_integrate(fn, run.field.values, 0.0, t, steps, rhs.spectral_radius_bound(), obs);
    }
    run.field.time = phi0.time + t;
    return run;
}

struct CorrelationScalingRow {
    int n = 0;
    double sup_phi = 0.0;
    double normalized = 0.0;  // sup |phi| * n / log n
};

// One row of the Thm-2.8 scaling table for a given n.  `source_radius` is the
// macroscopic radius beyond which the squared gradient of the profile is
// negligible (window rule: L = n * (source_radius + 6 sqrt(2T))).
inline CorrelationScalingRow correlation_scaling_row(const InitialProfile& profile,
                                                     const ModelParams& p, double source_radius,
                                                     const CorrelationSolveOptions& opt = {}) {
    const WindowV wv = WindowV::for_horizon(p, source_radius);
    const double mean_interest = static_cast<double>(wv.L) / p.n + 0.5;
    const Window1D w1 = Window1D::for_horizon(p, mean_interest);
    const MeanPath path = evolve_mean_path(profile, p, w1, {.track_gradient = false});

    const CorrelationRun run =
        evolve_correlation(CorrelationField::zero(wv), path, p, p.T, opt);
    CorrelationScalingRow row;
    row.n = p.n;
    row.sup_phi = run.sup_abs;
    row.normalized = run.sup_abs * p.n / std::log(static_cast<double>(p.n));
    return row;
}

}  // namespace slowbond
