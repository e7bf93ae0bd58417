#pragma once

// Transient analysis of finite continuous-time Markov chains via
// uniformization (Jensen's method).  Distributions computed this way are
// nonnegative and sum to one by construction, which is what the transition
// table invariants demand; the Poisson series is truncated at 1e-13 mass.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace slowbond {

struct SparseChain {
    std::size_t size = 0;
    std::vector<std::size_t> row_ptr;  // size+1
    std::vector<std::size_t> col;
    std::vector<double> rate;
    std::vector<double> exit_rate;  // per-state total rate
    double max_exit = 0.0;
};

struct PoissonWindow {
    std::size_t k_hi = 0;
    std::size_t k_lo = 0;
    std::vector<double> w;  // normalized weights for k in [k_lo, k_hi]
    double weight(std::size_t k) const {
        return (k < k_lo || k > k_hi) ? 0.0 : w[k - k_lo];
    }
};

inline PoissonWindow poisson_window(double lambda_t, double tol = 1e-13) {
    PoissonWindow pw;
    if (lambda_t <= 0.0) {
        pw.w = {1.0};
        return pw;
    }
    const auto mode = static_cast<long long>(std::floor(lambda_t));
    const auto lw = [lambda_t](long long k) {
        return -lambda_t + static_cast<double>(k) * std::log(lambda_t) -
               std::lgamma(static_cast<double>(k) + 1.0);
    };
    const double cutoff = lw(mode) + std::log(tol) - 8.0;
    long long klo = mode;
    while (klo > 0 && lw(klo - 1) >= cutoff) --klo;
    long long khi = mode;
    while (lw(khi + 1) >= cutoff) ++khi;

    pw.k_lo = static_cast<std::size_t>(klo);
    pw.k_hi = static_cast<std::size_t>(khi);
    pw.w.resize(static_cast<std::size_t>(khi - klo + 1));
    double sum = 0.0;
    for (long long k = klo; k <= khi; ++k) {
        const double v = std::exp(lw(k) - lw(mode));
        pw.w[static_cast<std::size_t>(k - klo)] = v;
        sum += v;
    }
    for (double& v : pw.w) v /= sum;
    return pw;
}

// out = P~^T q with P~ = I + Q/Lambda (distributions propagate on the left).
inline void apply_ptilde_transpose(const SparseChain& c, double lambda,
                                   const std::vector<double>& q, std::vector<double>& out) {
    out.assign(c.size, 0.0);
    for (std::size_t i = 0; i < c.size; ++i) {
        const double qi = q[i];
        if (qi == 0.0) continue;
        out[i] += qi * (1.0 - c.exit_rate[i] / lambda);
        for (std::size_t e = c.row_ptr[i]; e < c.row_ptr[i + 1]; ++e)
            out[c.col[e]] += qi * (c.rate[e] / lambda);
    }
}

// Distribution at time t started from p0.
inline std::vector<double> transient_distribution(const SparseChain& c, std::vector<double> p0,
                                                  double t, double tol = 1e-13) {
    if (c.size != p0.size()) throw std::invalid_argument("transient: size mismatch");
    if (t < 0.0) throw std::invalid_argument("transient: t must be >= 0");
    const double lambda = c.max_exit;
    if (t == 0.0 || lambda == 0.0) return p0;

    const PoissonWindow pw = poisson_window(lambda * t, tol);
    std::vector<double> acc(c.size, 0.0), next(c.size);
    std::vector<double> q = std::move(p0);
    for (std::size_t k = 0;; ++k) {
        const double wk = pw.weight(k);
        if (wk != 0.0)
            for (std::size_t i = 0; i < c.size; ++i) acc[i] += wk * q[i];
        if (k == pw.k_hi) break;
        apply_ptilde_transpose(c, lambda, q, next);
        q.swap(next);
    }
    return acc;
}

// Exact occupation functional  integral_0^t sum_{i in target} p_s(i) ds,
// using the identity  int_0^t pois(k; L s) ds = P[N_{Lt} >= k+1] / L.
// Serves as the independent oracle for the Simpson-based implementation.
template <class TargetPred>
double occupation_integral_exact(const SparseChain& c, std::vector<double> p0, double t,
                                 TargetPred&& in_target, double tol = 1e-13) {
    if (t <= 0.0) return 0.0;
    const double lambda = c.max_exit;
    if (lambda == 0.0) {
        double m = 0.0;
        for (std::size_t i = 0; i < c.size; ++i)
            if (in_target(i)) m += p0[i];
        return m * t;
    }
    const PoissonWindow pw = poisson_window(lambda * t, tol);
    std::vector<double> q = std::move(p0), next(c.size);
    double acc = 0.0;
    double cdf = 0.0;
    for (std::size_t k = 0;; ++k) {
        cdf += pw.weight(k);
        const double survivor = 1.0 - cdf;  // P[N >= k+1]
        if (survivor > 0.0) {
            double m = 0.0;
            for (std::size_t i = 0; i < c.size; ++i)
                if (in_target(i)) m += q[i];
            acc += survivor / lambda * m;
        }
        if (k == pw.k_hi) break;
        apply_ptilde_transpose(c, lambda, q, next);
        q.swap(next);
    }
    return acc;
}

}  // namespace slowbond
