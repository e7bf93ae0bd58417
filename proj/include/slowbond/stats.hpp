#pragma once

// Statistics helpers shared by the Monte-Carlo modules: deterministic
// (pairwise-summed) moments, normal-approximation confidence intervals,
// least-squares regression, and an Anderson–Darling EDF test with simulated
// critical values for the Gaussianity criteria.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "slowbond/util.hpp"

namespace slowbond {

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // z * sd / sqrt(N)
    double sd = 0.0;
    std::size_t count = 0;
};

inline double sample_variance(std::span<const double> xs, double mean) {
    if (xs.size() < 2) return 0.0;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

inline MeanCi mean_ci(std::span<const double> xs, double z) {
    MeanCi r;
    r.count = xs.size();
    if (xs.empty()) return r;
    r.mean = pairwise_mean(xs);
    r.sd = std::sqrt(sample_variance(xs, r.mean));
    r.half_width = z * r.sd / std::sqrt(static_cast<double>(xs.size()));
    return r;
}

inline double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("sample_covariance: bad sample sizes");
    const double mx = pairwise_mean(xs);
    const double my = pairwise_mean(ys);
    std::vector<double> prod(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) prod[i] = (xs[i] - mx) * (ys[i] - my);
    return pairwise_sum(prod) / static_cast<double>(xs.size() - 1);
}

// Ordinary least squares of y on x (with intercept).
struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double residual_variance = 0.0;  // unbiased, d.o.f. N-2
    std::vector<double> residuals;
};

inline Regression linear_regression(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("linear_regression: need matching samples, N >= 3");
    const double mx = pairwise_mean(x);
    const double my = pairwise_mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_regression: degenerate regressor");
    Regression r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.residuals.resize(x.size());
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.residuals[i] = y[i] - (r.intercept + r.slope * x[i]);
        ssr += r.residuals[i] * r.residuals[i];
    }
    r.residual_variance = ssr / static_cast<double>(x.size() - 2);
    r.slope_se = std::sqrt(r.residual_variance / sxx);
    return r;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Anderson–Darling statistic against a fully specified N(mu, sigma^2).
inline double anderson_darling_statistic(std::vector<double> xs, double mu, double sigma) {
    if (xs.size() < 8) throw std::invalid_argument("anderson_darling: sample too small");
    if (!(sigma > 0.0)) throw std::invalid_argument("anderson_darling: sigma must be > 0");
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fi = std::clamp(normal_cdf((xs[i] - mu) / sigma), 1e-300, 1.0 - 1e-16);
        const double fj =
            std::clamp(normal_cdf((xs[xs.size() - 1 - i] - mu) / sigma), 1e-300, 1.0 - 1e-16);
        acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(fi) + std::log1p(-fj));
    }
    return -n - acc / n;
}

// Critical value of the fully-specified-null A^2 at the given level, obtained
// by simulation (the null statistic is distribution free, so uniforms do).
// Deterministic for a fixed sample size and level.
inline double anderson_darling_critical(std::size_t sample_size, double level,
                                        std::size_t reps = 1000) {
    std::vector<double> stats(reps);
    Rng rng(0x5EEDAD5EEDAD5EEDull);
    std::vector<double> u(sample_size);
    for (std::size_t r = 0; r < reps; ++r) {
        for (double& v : u) v = rng.uniform_pos();
        std::sort(u.begin(), u.end());
        const auto n = static_cast<double>(sample_size);
        double acc = 0.0;
        for (std::size_t i = 0; i < sample_size; ++i) {
            const double fi = std::clamp(u[i], 1e-300, 1.0 - 1e-16);
            const double fj = std::clamp(u[sample_size - 1 - i], 1e-300, 1.0 - 1e-16);
            acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(fi) + std::log1p(-fj));
        }
        stats[r] = -n - acc / n;
    }
    std::sort(stats.begin(), stats.end());
    const auto k = static_cast<std::size_t>(std::ceil((1.0 - level) * static_cast<double>(reps)));
    return stats[std::min(k, reps - 1)];
}

struct NormalityTest {
    double statistic = 0.0;
    double critical = 0.0;
    bool rejected = false;
};

inline NormalityTest test_normality(const std::vector<double>& xs, double mu, double sigma,
                                    double level = 0.01) {
    NormalityTest t;
    t.statistic = anderson_darling_statistic(xs, mu, sigma);
    t.critical = anderson_darling_critical(std::min<std::size_t>(xs.size(), 4000), level);
    t.rejected = t.statistic > t.critical;
    return t;
}

// max/min of positive entries; the bounded-ratio scaling tests.
inline double ratio_spread(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("ratio_spread: empty");
    double lo = xs[0], hi = xs[0];
    for (double x : xs) {
        if (!(x > 0.0)) throw std::invalid_argument("ratio_spread: entries must be positive");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi / lo;
}

}  // namespace slowbond
