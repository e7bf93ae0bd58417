#pragma once

// Time integrators for the linear lattice ODE systems  y' = F(t, y):
//
//   * rk4_integrate  — classical fixed-step RK4; the workhorse for the 1-D
//     mean equation (dt = 0.25 / spectral-radius) and the small-system
//     cross-checks.
//   * rkc2_integrate — damped second-order Runge–Kutta–Chebyshev
//     (van der Houwen / Sommeijer / Verwer).  Real-axis stability grows like
//     0.65*s^2 per step of s stages, which is what makes the 2-D correlation
//     solve affordable: the step size is set by accuracy, not by the 8*n^2
//     spectral radius.
//
// Both drivers call an observer after every accepted step; RHS functors are
// expected to be deterministic and parallelize internally.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace slowbond {

using Field = std::vector<double>;
using RhsFn = std::function<void(double t, const Field& y, Field& out)>;
using StepObserver = std::function<void(double t, const Field& y)>;

namespace detail {

inline void check_same_size(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("integrator: field size mismatch");
}

}  // namespace detail

// RK4 stability interval on the negative real axis.
inline constexpr double kRk4RealStability = 2.785;

// Integrates over [t0, t0 + steps*dt].  `rho_bound` is an upper bound for the
// spectral radius of the (frozen) Jacobian; steps violating the stability
// interval are rejected up front.
inline void rk4_integrate(const RhsFn& rhs, Field& y, double t0, double dt, std::size_t steps,
                          double rho_bound, const StepObserver& observe = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_integrate: dt must be > 0");
    if (dt * rho_bound > kRk4RealStability)
        throw std::invalid_argument("rk4_integrate: unstable step size dt*rho > 2.785");

    const std::size_t m = y.size();
    Field k(m), stage(m), acc(m);
    double t = t0;
    for (std::size_t step = 0; step < steps; ++step) {
        rhs(t, y, k);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
            acc[i] = y[i] + dt / 6.0 * k[i];
            stage[i] = y[i] + 0.5 * dt * k[i];
        }
        rhs(t + 0.5 * dt, stage, k);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
            acc[i] += dt / 3.0 * k[i];
            stage[i] = y[i] + 0.5 * dt * k[i];
        }
        rhs(t + 0.5 * dt, stage, k);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
            acc[i] += dt / 3.0 * k[i];
            stage[i] = y[i] + dt * k[i];
        }
        rhs(t + dt, stage, k);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
            y[i] = acc[i] + dt / 6.0 * k[i];
        t = t0 + static_cast<double>(step + 1) * dt;
        if (observe) observe(t, y);
    }
}

namespace rkc {

struct Coefficients {
    int s = 0;
    double beta = 0.0;  // real-axis stability boundary
    std::vector<double> mu, nu, mu_tilde, gamma_tilde, c;
    double mu_tilde_1 = 0.0;
};

// Chebyshev recurrences at w0 for T, T', T''; damping eps = 2/13.
inline Coefficients coefficients(int s) {
    if (s < 2) throw std::invalid_argument("rkc: stage count must be >= 2");
    const double eps = 2.0 / 13.0;
    const double w0 = 1.0 + eps / (static_cast<double>(s) * s);

    std::vector<double> T(s + 1), Tp(s + 1), Tpp(s + 1);
    T[0] = 1.0;
    T[1] = w0;
    Tp[0] = 0.0;
    Tp[1] = 1.0;
    Tpp[0] = 0.0;
    Tpp[1] = 0.0;
    for (int j = 2; j <= s; ++j) {
        T[j] = 2.0 * w0 * T[j - 1] - T[j - 2];
        Tp[j] = 2.0 * T[j - 1] + 2.0 * w0 * Tp[j - 1] - Tp[j - 2];
        Tpp[j] = 4.0 * Tp[j - 1] + 2.0 * w0 * Tpp[j - 1] - Tpp[j - 2];
    }
    const double w1 = Tp[s] / Tpp[s];

    std::vector<double> b(s + 1), a(s + 1);
    for (int j = 2; j <= s; ++j) b[j] = Tpp[j] / (Tp[j] * Tp[j]);
    b[0] = b[2];
    b[1] = b[2];
    for (int j = 0; j <= s; ++j) a[j] = 1.0 - b[j] * T[j];

    Coefficients co;
    co.s = s;
    co.beta = (w0 + 1.0) * Tpp[s] / Tp[s];
    co.mu.assign(s + 1, 0.0);
    co.nu.assign(s + 1, 0.0);
    co.mu_tilde.assign(s + 1, 0.0);
    co.gamma_tilde.assign(s + 1, 0.0);
    co.c.assign(s + 1, 0.0);
    co.mu_tilde_1 = b[1] * w1;
    // abscissae from the stage-consistency recurrence (the first-order time
    // position of each stage); this keeps second order for sourced systems
    // and lands c[s] = 1 exactly
    co.c[1] = co.mu_tilde_1;
    for (int j = 2; j <= s; ++j) {
        co.mu[j] = 2.0 * b[j] * w0 / b[j - 1];
        co.nu[j] = -b[j] / b[j - 2];
        co.mu_tilde[j] = 2.0 * b[j] * w1 / b[j - 1];
        co.gamma_tilde[j] = -a[j - 1] * co.mu_tilde[j];
        co.c[j] = co.mu[j] * co.c[j - 1] + co.nu[j] * co.c[j - 2] + co.mu_tilde[j] +
                  co.gamma_tilde[j];
    }
    return co;
}

inline int stages_for(double dt_times_rho) {
    for (int s = 2; s <= 512; ++s)
        if (coefficients(s).beta >= dt_times_rho / 0.90) return s;
    throw std::invalid_argument("rkc: step size too large even for 512 stages");
}

}  // namespace rkc

// Integrates over [t0, t1] with `steps` equal macro-steps.  The stage count is
// chosen per run from the stability boundary with a 10% safety margin.
inline void rkc2_integrate(const RhsFn& rhs, Field& y, double t0, double t1, std::size_t steps,
                           double rho_bound, const StepObserver& observe = {}) {
    if (steps == 0 || !(t1 > t0)) return;
    const double tau = (t1 - t0) / static_cast<double>(steps);
    const auto co = rkc::coefficients(rkc::stages_for(tau * rho_bound));
    const std::size_t m = y.size();

    Field f0(m), fj(m), yjm2(m), yjm1(m), yj(m);
    double t = t0;
    for (std::size_t step = 0; step < steps; ++step) {
        // Y0 = y, Y1 = Y0 + mu~1 tau F(t, Y0)
        rhs(t, y, f0);
        yjm2 = y;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
            yjm1[i] = y[i] + co.mu_tilde_1 * tau * f0[i];

        for (int j = 2; j <= co.s; ++j) {
            rhs(t + co.c[j - 1] * tau, yjm1, fj);
            const double one_m = 1.0 - co.mu[j] - co.nu[j];
            const double mu = co.mu[j], nu = co.nu[j];
            const double mt = co.mu_tilde[j] * tau, gt = co.gamma_tilde[j] * tau;
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i)
                yj[i] = one_m * y[i] + mu * yjm1[i] + nu * yjm2[i] + mt * fj[i] + gt * f0[i];
            std::swap(yjm2, yjm1);
            std::swap(yjm1, yj);
        }
        y.swap(yjm1);  // y <- Y_s; stage buffers are rebuilt next step
        t = t0 + static_cast<double>(step + 1) * tau;
        if (observe) observe(t, y);
    }
}

}  // namespace slowbond
