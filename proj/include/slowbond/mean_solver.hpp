#pragma once

// Deterministic integration of the discrete mean equation
//     d/dt rho_t(x) = n^2 (A_n rho_t)(x)
// on a reflecting window, plus the discrete-derivative diagnostics feeding
// the correlation solver and the fluctuation checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slowbond/integrators.hpp"
#include "slowbond/lattice.hpp"
#include "slowbond/profiles.hpp"
#include "slowbond/util.hpp"

namespace slowbond {

struct MeanField {
    Window1D window;
    Field values;  // occupation probabilities, indexed by window.index(x)
    double time = 0.0;

    double at(Site x) const { return values[window.index(x)]; }
    double& at(Site x) { return values[window.index(x)]; }

    double mass() const { return pairwise_sum(values); }

    static MeanField from_profile(const InitialProfile& rho0, const Window1D& w, int n) {
        MeanField f;
        f.window = w;
        f.values.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) f.values[i] = rho0.at_site(w.site(i), n);
        return f;
    }
};

// n^2 A_n with reflecting truncation, assembled bond-wise so that mass is
// conserved identically.
class MeanGenerator {
  public:
    MeanGenerator(const Window1D& w, const ModelParams& p) : window_(w) {
        const double n2 = static_cast<double>(p.n) * p.n;
        bond_rate_.resize(w.size() - 1);
        for (std::size_t b = 0; b + 1 < w.size(); ++b)
            bond_rate_[b] = n2 * bond_rate_1d(w.site(b), p);
        // spectral radius bound: 2 * max total exit rate (Gershgorin)
        double max_exit = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double r = 0.0;
            if (i > 0) r += bond_rate_[i - 1];
            if (i + 1 < w.size()) r += bond_rate_[i];
            max_exit = std::max(max_exit, r);
        }
        rho_bound_ = 2.0 * max_exit;
    }

    void operator()(double, const Field& y, Field& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t b = 0; b + 1 < y.size(); ++b) {
            const double flux = bond_rate_[b] * (y[b + 1] - y[b]);
            out[b] += flux;
            out[b + 1] -= flux;
        }
    }

    double spectral_radius_bound() const { return rho_bound_; }

  private:
    Window1D window_;
    std::vector<double> bond_rate_;
    double rho_bound_ = 0.0;
};

struct GradientSup {
    double value = 0.0;  // sup over t, x != 0 of n|rho(x+1) - rho(x)|
    double at_time = 0.0;
    Site at_site = 0;
    double diag_at_bond0 = 0.0;  // sup over t of |rho(1) - rho(0)| (diagnostic)
};

// Mean path on a uniform macroscopic snapshot grid with 4-point Lagrange
// interpolation in time.  Snapshot spacing defaults to 1e-3.
class MeanPath {
  public:
    MeanPath(Window1D w, int n, double grid_dt) : window_(w), n_(n), grid_dt_(grid_dt) {}

    void push(const MeanField& f) { snapshots_.push_back(f.values); }

    const Window1D& window() const { return window_; }
    int n() const { return n_; }
    double grid_dt() const { return grid_dt_; }
    double horizon() const {
        return snapshots_.empty() ? 0.0 : grid_dt_ * static_cast<double>(snapshots_.size() - 1);
    }
    std::size_t snapshot_count() const { return snapshots_.size(); }
    const Field& snapshot(std::size_t k) const { return snapshots_[k]; }
    double snapshot_time(std::size_t k) const { return grid_dt_ * static_cast<double>(k); }

    double value(double t, Site x) const {
        const std::size_t i = window_.index(x);
        double w[4];
        const std::size_t k0 = weights(t, w);
        return w[0] * snapshots_[k0][i] + w[1] * snapshots_[k0 + 1][i] +
               w[2] * snapshots_[k0 + 2][i] + w[3] * snapshots_[k0 + 3][i];
    }

    // n(rho_t(x+1) - rho_t(x)) for every bond x in [lo, hi).
    void gradient_row(double t, Field& out) const {
        double w[4];
        const std::size_t k0 = weights(t, w);
        const std::size_t nb = window_.size() - 1;
        out.resize(nb);
        const double n = static_cast<double>(n_);
        const Field& a = snapshots_[k0];
        const Field& b = snapshots_[k0 + 1];
        const Field& c = snapshots_[k0 + 2];
        const Field& d = snapshots_[k0 + 3];
        for (std::size_t i = 0; i < nb; ++i) {
            const double lo = w[0] * a[i] + w[1] * b[i] + w[2] * c[i] + w[3] * d[i];
            const double hi = w[0] * a[i + 1] + w[1] * b[i + 1] + w[2] * c[i + 1] + w[3] * d[i + 1];
            out[i] = n * (hi - lo);
        }
    }

    GradientSup tracked_gradient_sup() const { return tracked_; }
    GradientSup& tracked_gradient_sup() { return tracked_; }

  private:
    std::size_t weights(double t, double (&w)[4]) const {
        if (snapshots_.size() < 4) throw std::logic_error("MeanPath: needs >= 4 snapshots");
        const double s = std::clamp(t / grid_dt_, 0.0, static_cast<double>(snapshots_.size() - 1));
        const auto kmax = static_cast<long long>(snapshots_.size()) - 4;
        const long long k0 = std::clamp<long long>(static_cast<long long>(std::floor(s)) - 1, 0, kmax);
        const double u = s - static_cast<double>(k0);  // in [0,3]
        w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
        w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
        w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
        return static_cast<std::size_t>(k0);
    }

    Window1D window_;
    int n_;
    double grid_dt_;
    std::vector<Field> snapshots_;
    GradientSup tracked_;
};

struct MeanSolveOptions {
    double dt_factor = 0.25;    // dt = dt_factor / spectral-radius bound
    double grid_dt = 1e-3;      // snapshot spacing for paths
    bool track_gradient = true; // running sup at every integrator step
};

inline void update_gradient_sup(const Field& y, const Window1D& w, int n, double t,
                                GradientSup& g) {
    const double dn = static_cast<double>(n);
    for (std::size_t b = 0; b + 1 < y.size(); ++b) {
        const Site x = w.site(b);
        const double diff = std::abs(y[b + 1] - y[b]);
        if (x == 0) {
            g.diag_at_bond0 = std::max(g.diag_at_bond0, diff);
            continue;
        }
        if (dn * diff > g.value) {
            g.value = dn * diff;
            g.at_time = t;
            g.at_site = x;
        }
    }
}

// Solution of the mean equation at macroscopic time t (RK4, dt pinned to
// 0.25/rho; rejects unstable steps through rk4_integrate).
inline MeanField evolve_mean(const MeanField& rho0, const ModelParams& p, double t,
                             const MeanSolveOptions& opt = {}) {
    if (t < 0.0) throw std::invalid_argument("evolve_mean: t must be >= 0");
    MeanField f = rho0;
    if (t == 0.0) return f;
    const MeanGenerator gen(f.window, p);
    const double dt_target = opt.dt_factor / gen.spectral_radius_bound();
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt_target));
    rk4_integrate([&gen](double ts, const Field& y, Field& out) { gen(ts, y, out); }, f.values,
                  0.0, t / static_cast<double>(steps), steps, gen.spectral_radius_bound());
    f.time = rho0.time + t;
    return f;
}

// Full path over [0, T] with snapshots every opt.grid_dt and (optionally) a
// running gradient sup over every integrator step.
inline MeanPath evolve_mean_path(const InitialProfile& rho0, const ModelParams& p,
                                 const Window1D& w, const MeanSolveOptions& opt = {}) {
    MeanPath path(w, p.n, opt.grid_dt);
    MeanField f = MeanField::from_profile(rho0, w, p.n);
    const MeanGenerator gen(w, p);
    const double dt_target = opt.dt_factor / gen.spectral_radius_bound();

    path.push(f);
    if (opt.track_gradient)
        update_gradient_sup(f.values, w, p.n, 0.0, path.tracked_gradient_sup());

    const auto intervals = static_cast<std::size_t>(std::llround(std::ceil(p.T / opt.grid_dt)));
    for (std::size_t k = 0; k < intervals; ++k) {
        const double t0 = static_cast<double>(k) * opt.grid_dt;
        const double t1 = std::min(p.T, t0 + opt.grid_dt);
        const auto steps = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil((t1 - t0) / dt_target)));
        StepObserver obs;
        if (opt.track_gradient)
            obs = [&](double ts, const Field& y) {
                update_gradient_sup(y, w, p.n, ts, path.tracked_gradient_sup());
            };
        rk4_integrate([&gen](double ts, const Field& y, Field& out) { gen(ts, y, out); },
                      f.values, t0, (t1 - t0) / static_cast<double>(steps), steps,
                      gen.spectral_radius_bound(), obs);
        f.time = t1;
        path.push(f);
    }
    return path;
}

// Sup over the stored snapshot grid, excluding the slow bond.
inline GradientSup discrete_gradient_sup(const MeanPath& path) {
    GradientSup g;
    Field row;
    for (std::size_t k = 0; k < path.snapshot_count(); ++k) {
        const Field& y = path.snapshot(k);
        const double t = path.snapshot_time(k);
        const auto& w = path.window();
        const double dn = static_cast<double>(path.n());
        for (std::size_t b = 0; b + 1 < y.size(); ++b) {
            const Site x = w.site(b);
            const double diff = std::abs(y[b + 1] - y[b]);
            if (x == 0) {
                g.diag_at_bond0 = std::max(g.diag_at_bond0, diff);
                continue;
            }
            if (dn * diff > g.value) {
                g.value = dn * diff;
                g.at_time = t;
                g.at_site = x;
            }
        }
    }
    return g;
}

}  // namespace slowbond
