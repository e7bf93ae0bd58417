#pragma once

// Confrontation of the empirical fluctuation statistics with the
// Ornstein-Uhlenbeck predictions: initial-field CLT, the deterministic
// remainder coefficient of the Dynkin decomposition, quadratic-variation
// convergence, and the conditional-law regression.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "slowbond/ensemble.hpp"
#include "slowbond/ou.hpp"
#include "slowbond/semigroup.hpp"
#include "slowbond/stats.hpp"
#include "slowbond/test_function.hpp"

namespace slowbond {

// ---------------------------------------------------------------------------
// Initial field CLT (product Bernoulli start, no dynamics)

struct CltReport {
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    double predicted_variance = 0.0;
    double mean_ci = 0.0;  // 3 sigma on the mean
    NormalityTest normality;
    std::vector<double> samples;
};

inline CltReport initial_field_clt(const InitialProfile& rho0, const ModelParams& p,
                                   const Window1D& w, const TestFunction& f,
                                   std::size_t replicas, std::uint64_t seed) {
    CltReport rep;
    rep.samples.resize(replicas);
    const double sq = std::sqrt(static_cast<double>(p.n));
    // per-site f/sqrt(n) and rho rows
    std::vector<double> frow(w.size()), rrow(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        frow[i] = f.value(static_cast<double>(w.site(i)) / p.n) / sq;
        rrow[i] = rho0.at_site(w.site(i), p.n);
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(replicas); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            acc += frow[i] * ((rng.uniform() < rrow[i] ? 1.0 : 0.0) - rrow[i]);
        rep.samples[static_cast<std::size_t>(r)] = acc;
    }
    const MeanCi m = mean_ci(rep.samples, 3.0);
    rep.sample_mean = m.mean;
    rep.mean_ci = m.half_width;
    rep.sample_variance = sample_variance(rep.samples, m.mean);
    rep.predicted_variance = initial_field_variance(f, rho0);
    if (rep.predicted_variance > 0.0)
        rep.normality =
            test_normality(rep.samples, 0.0, std::sqrt(rep.predicted_variance), 0.01);
    return rep;
}

// ---------------------------------------------------------------------------
// Remainder coefficient of Lemma-type bound |R_t(f)| <= 2t * coefficient:
// n^{-1/2} sum_x | n^2 A_n f(x/n) - Delta_alpha f(x/n) |.

inline double remainder_coefficient(const TestFunction& f, const ModelParams& p,
                                    const Window1D& w) {
    const double n = static_cast<double>(p.n);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Site x = w.site(i);
        const auto fv = [&](Site z) { return f.value(static_cast<double>(z) / n); };
        const double a = bond_rate_1d(x, p) * (fv(x + 1) - fv(x)) +
                         bond_rate_1d(x - 1, p) * (fv(x - 1) - fv(x));
        const double discrete = n * n * a;
        const double continuum = robin_laplacian(f, static_cast<double>(x) / n);
        acc += std::abs(discrete - continuum);
    }
    return acc / std::sqrt(n);
}

// ---------------------------------------------------------------------------
// Quadratic variation against the macroscopic prediction

struct QvReport {
    double mean_qv = 0.0;
    double qv_ci = 0.0;
    double predicted = 0.0;
    double relative_gap = 0.0;
};

inline QvReport qv_convergence(const std::vector<double>& qv_samples, double predicted) {
    QvReport rep;
    const MeanCi m = mean_ci(qv_samples, 3.0);
    rep.mean_qv = m.mean;
    rep.qv_ci = m.half_width;
    rep.predicted = predicted;
    rep.relative_gap = std::abs(m.mean - predicted) / std::max(1e-300, std::abs(predicted));
    return rep;
}

// ---------------------------------------------------------------------------
// Conditional-law regression: Y_t(f) against Y_s(T_{t-s} f)

struct OuConditionalReport {
    Regression regression;
    double residual_variance = 0.0;
    double predicted_variance = 0.0;
    double relative_gap = 0.0;
    bool slope_within_3se_of_1 = false;
    NormalityTest residual_normality;
};

inline OuConditionalReport ou_conditional_check(const std::vector<double>& ys_of_Tf,
                                                const std::vector<double>& yt_of_f,
                                                double predicted_variance) {
    OuConditionalReport rep;
    rep.regression = linear_regression(ys_of_Tf, yt_of_f);
    rep.residual_variance = rep.regression.residual_variance;
    rep.predicted_variance = predicted_variance;
    rep.relative_gap = std::abs(rep.residual_variance - predicted_variance) /
                       std::max(1e-300, predicted_variance);
    rep.slope_within_3se_of_1 =
        std::abs(rep.regression.slope - 1.0) <= 3.0 * rep.regression.slope_se;
    rep.residual_normality = test_normality(rep.regression.residuals, 0.0,
                                            std::sqrt(predicted_variance), 0.01);
    return rep;
}

// Lattice rows of the semigroup image T_{dt} f, registered alongside f so the
// ensemble records Y_s(T_{t-s} f) directly.
inline FunctionRows semigroup_function_rows(const TestFunction& f, double dt,
                                            const Window1D& w, const ModelParams& p) {
    if (dt <= 0.0) return FunctionRows::build(f, w, p);
    const RobinSemigroup sg(as_piecewise(f), dt, f.alpha());
    const double radius =
        f.decay_radius(1e-15) + 16.0 * std::sqrt(dt) + 2.0;
    const TabulatedPiecewise tab(
        [&sg](double u, bool rs) { return sg.value_side(u, rs); }, radius,
        std::min(0.005, std::sqrt(4.0 * dt) / 64.0));
    const PiecewiseFn pw = tab.piecewise();

    FunctionRows r;
    const double n = static_cast<double>(p.n);
    const double sq = std::sqrt(n);
    const std::size_t m = w.size();
    r.f_over_sqrt_n.resize(m);
    r.dynkin_row.assign(m, 0.0);
    r.qv_weight.assign(m - 1, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        r.f_over_sqrt_n[i] = pw(static_cast<double>(w.site(i)) / n) / sq;
    return r;
}

}  // namespace slowbond
