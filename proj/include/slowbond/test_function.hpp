#pragma once

// The test-function space S_alpha: functions smooth off the origin, left
// continuous at 0, Schwartz-type decay, whose one-sided jets satisfy the
// Robin chain
//     f^(2k+1)(0+) = f^(2k+1)(0-) = alpha [ f^(2k)(0+) - f^(2k)(0-) ]
// for k = 0 .. floor((K-1)/2).
//
// Members are finite sums of side-restricted polynomial x Gaussian terms.
// Construction takes arbitrary shape terms, computes their one-sided jets at
// the origin analytically, and adds one correction term per side whose
// polynomial is solved (triangular system) so the total jets meet the chain
// exactly.  All derivatives are symbolic, so the Robin conditions hold to
// rounding, not to quadrature.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slowbond {

struct Poly {
    std::vector<double> c;  // low to high degree

    double eval(double u) const {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * u + c[j];
        return acc;
    }
    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) return d;
        d.c.resize(c.size() - 1);
        for (std::size_t j = 1; j < c.size(); ++j)
            d.c[j - 1] = c[j] * static_cast<double>(j);
        return d;
    }
    Poly times_linear(double a0, double a1) const {  // p(u) * (a0 + a1 u)
        Poly r;
        r.c.assign(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            r.c[j] += c[j] * a0;
            r.c[j + 1] += c[j] * a1;
        }
        return r;
    }
    Poly plus(const Poly& o) const {
        Poly r = *this;
        if (o.c.size() > r.c.size()) r.c.resize(o.c.size(), 0.0);
        for (std::size_t j = 0; j < o.c.size(); ++j) r.c[j] += o.c[j];
        return r;
    }
};

enum class TermSide { Both, Left, Right };

// poly(u) * exp(-((u-mu)/s)^2 / 2), live on one side of the origin or both.
struct GaussTerm {
    TermSide side = TermSide::Both;
    Poly poly;
    double mu = 0.0;
    double s = 1.0;

    double envelope(double u) const {
        const double z = (u - mu) / s;
        return std::exp(-0.5 * z * z);
    }
    double value(double u) const { return poly.eval(u) * envelope(u); }

    // d/du (p G) = (p' - p (u-mu)/s^2) G
    GaussTerm derivative() const {
        GaussTerm d = *this;
        d.poly = poly.derivative().plus(poly.times_linear(mu / (s * s), -1.0 / (s * s)));
        return d;
    }
    bool active(bool right_side) const {
        return side == TermSide::Both || (right_side ? side == TermSide::Right
                                                     : side == TermSide::Left);
    }
};

class TestFunction {
  public:
    TestFunction(std::vector<GaussTerm> terms, double alpha, int order)
        : alpha_(alpha), order_(order) {
        if (order < 1) throw std::invalid_argument("TestFunction: order K must be >= 1");
        derivs_.push_back(std::move(terms));
        for (int k = 0; k < order_ + 3; ++k) {
            std::vector<GaussTerm> next;
            next.reserve(derivs_.back().size());
            for (const GaussTerm& t : derivs_.back()) next.push_back(t.derivative());
            derivs_.push_back(std::move(next));
        }
    }

    double alpha() const { return alpha_; }
    int order() const { return order_; }
    // narrowest Gaussian width among the terms (resolution scale of the data)
    double min_width() const {
        double w = 10.0;
        for (const GaussTerm& t : derivs_[0]) w = std::min(w, t.s);
        return w;
    }
    int robin_orders() const { return (order_ - 1) / 2; }  // k <= this are enforced

    // left continuous at 0
    double value(double u) const { return derivative_value(0, u, u > 0.0); }
    double operator()(double u) const { return value(u); }

    // k-th derivative; `right_side` picks the branch (only matters at u = 0)
    double derivative_value(int k, double u, bool right_side) const {
        if (k < 0 || k >= static_cast<int>(derivs_.size()))
            throw std::invalid_argument("TestFunction: derivative order out of range");
        double acc = 0.0;
        const bool rs = (u == 0.0) ? right_side : (u > 0.0);
        for (const GaussTerm& t : derivs_[static_cast<std::size_t>(k)])
            if (t.active(rs)) acc += t.value(u);
        return acc;
    }

    double jet(int k, bool right_side) const { return derivative_value(k, 0.0, right_side); }
    double jump() const { return jet(0, true) - jet(0, false); }

    // sup_{u != 0} (1 + |u|^l) |f^(k)(u)| by scanning both sides
    double norm_kl(int k, int l) const {
        const double R = decay_radius(1e-18) + 1.0;
        double m = 0.0;
        const int steps = 4000;
        for (int i = 0; i <= steps; ++i) {
            const double u = -R + 2.0 * R * static_cast<double>(i) / steps;
            const double v = (1.0 + std::pow(std::abs(u), l)) *
                             std::abs(derivative_value(k, u, u >= 0.0));
            m = std::max(m, v);
        }
        // side limits at the origin
        for (bool rs : {false, true})
            m = std::max(m, std::abs(jet(k, rs)));
        return m;
    }

    // radius beyond which |f| (and its first two derivatives) fall below eps
    double decay_radius(double eps) const {
        double R = 1.0;
        for (const GaussTerm& t : derivs_[0]) R = std::max(R, std::abs(t.mu) + 3.0 * t.s);
        const auto small_beyond = [&](double r) {
            for (int k = 0; k <= 2; ++k)
                for (double x : {r, r + 0.37, r + 1.1}) {
                    if (std::abs(derivative_value(k, x, true)) > eps) return false;
                    if (std::abs(derivative_value(k, -x, false)) > eps) return false;
                }
            return true;
        };
        while (!small_beyond(R)) {
            R *= 1.3;
            if (R > 1e4)
                throw std::runtime_error("TestFunction: no numeric decay radius found");
        }
        return R;
    }

    // bound on sum_{|x| >= X} |f(x/n)| / sqrt(n), for truncation assertions
    double tail_sum_bound(double radius_u, int n) const {
        const double R = decay_radius(1e-30);
        if (radius_u >= R) return 0.0;
        double acc = 0.0;
        const double h = 1.0 / static_cast<double>(n);
        for (double u = radius_u; u <= R; u += h)
            acc += std::abs(value(u)) + std::abs(value(-u));
        return acc / std::sqrt(static_cast<double>(n));
    }

  private:
    double alpha_ = 1.0;
    int order_ = 1;
    std::vector<std::vector<GaussTerm>> derivs_;  // derivs_[k] = k-th derivative terms
};

struct ShapeTerm {
    TermSide side = TermSide::Both;
    std::vector<double> poly;  // coefficients, low to high
    double mu = 0.0;
    double s = 1.0;
};

struct TestFunctionSpec {
    double jump = 0.0;
    int order = 1;                  // K
    double correction_width = 1.0;  // sigma of the jet-fixing terms
    std::vector<ShapeTerm> terms;
    // explicit odd-order pins (order -> (right_side, value)); conflicts with
    // the Robin chain are reported as an infeasible constraint system
    std::map<int, std::pair<bool, double>> pinned_odd;
};

namespace detail {

// jets at 0 of u^j exp(-u^2/(2 s^2)): A[i][j] = C(i,j) j! G^(i-j)(0)
inline std::vector<std::vector<double>> centered_jet_matrix(int K, double s) {
    std::vector<double> gj(static_cast<std::size_t>(K) + 1, 0.0);  // G^(m)(0)
    gj[0] = 1.0;
    for (int m = 2; m <= K; m += 2)
        gj[static_cast<std::size_t>(m)] =
            -gj[static_cast<std::size_t>(m - 2)] * static_cast<double>(m - 1) / (s * s);
    std::vector<std::vector<double>> A(static_cast<std::size_t>(K) + 1,
                                       std::vector<double>(static_cast<std::size_t>(K) + 1, 0.0));
    for (int i = 0; i <= K; ++i)
        for (int j = 0; j <= i; ++j) {
            double binom = 1.0, fact = 1.0;
            for (int r = 0; r < j; ++r) {
                binom *= static_cast<double>(i - r) / static_cast<double>(r + 1);
                fact *= static_cast<double>(r + 1);
            }
            A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                binom * fact * gj[static_cast<std::size_t>(i - j)];
        }
    return A;
}

}  // namespace detail

inline TestFunction make_test_function(const TestFunctionSpec& spec, double alpha) {
    if (spec.order < 1)
        throw std::invalid_argument("make_test_function: order K must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("make_test_function: alpha must be > 0");
    const int K = spec.order;

    std::vector<GaussTerm> terms;
    for (const ShapeTerm& st : spec.terms) {
        GaussTerm t;
        t.side = st.side;
        t.poly.c = st.poly;
        t.mu = st.mu;
        t.s = st.s;
        terms.push_back(std::move(t));
    }

    // free jets of the shape part
    const TestFunction shape(terms, alpha, K);
    std::vector<std::vector<double>> d(2, std::vector<double>(static_cast<std::size_t>(K) + 1));
    for (int side = 0; side < 2; ++side)
        for (int i = 0; i <= K; ++i)
            d[static_cast<std::size_t>(side)][static_cast<std::size_t>(i)] =
                shape.jet(i, side == 1);

    // target jets
    auto t_jets = d;
    t_jets[1][0] = d[0][0] + spec.jump;  // total jump = spec.jump
    const int kmax = (K - 1) / 2;
    for (int k = 0; k <= kmax; ++k) {
        const int i = 2 * k + 1;
        const double forced =
            alpha * (t_jets[1][static_cast<std::size_t>(i - 1)] -
                     t_jets[0][static_cast<std::size_t>(i - 1)]);
        t_jets[0][static_cast<std::size_t>(i)] = forced;
        t_jets[1][static_cast<std::size_t>(i)] = forced;
    }
    for (const auto& [ord, pin] : spec.pinned_odd) {
        if (ord % 2 != 1 || ord > K)
            throw std::invalid_argument("make_test_function: pins must be odd orders <= K");
        const auto side = static_cast<std::size_t>(pin.first ? 1 : 0);
        if (ord <= 2 * kmax + 1 &&
            std::abs(t_jets[side][static_cast<std::size_t>(ord)] - pin.second) > 1e-12)
            throw std::invalid_argument(
                "make_test_function: infeasible constraint system (pinned derivative "
                "contradicts the Robin chain at order " +
                std::to_string(ord) + ")");
        t_jets[side][static_cast<std::size_t>(ord)] = pin.second;
    }

    // per-side correction polynomial (forward triangular solve)
    const auto A = detail::centered_jet_matrix(K, spec.correction_width);
    for (int side = 0; side < 2; ++side) {
        std::vector<double> q(static_cast<std::size_t>(K) + 1, 0.0);
        for (int i = 0; i <= K; ++i) {
            double rhs = t_jets[static_cast<std::size_t>(side)][static_cast<std::size_t>(i)] -
                         d[static_cast<std::size_t>(side)][static_cast<std::size_t>(i)];
            for (int j = 0; j < i; ++j)
                rhs -= A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                       q[static_cast<std::size_t>(j)];
            q[static_cast<std::size_t>(i)] =
                rhs / A[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
        GaussTerm corr;
        corr.side = side == 1 ? TermSide::Right : TermSide::Left;
        corr.poly.c = q;
        corr.mu = 0.0;
        corr.s = spec.correction_width;
        terms.push_back(std::move(corr));
    }

    TestFunction f(std::move(terms), alpha, K);
    // construction must satisfy the chain to rounding
    for (int k = 0; k <= kmax; ++k) {
        const int i = 2 * k + 1;
        const double want = alpha * (f.jet(i - 1, true) - f.jet(i - 1, false));
        const double scale = 1.0 + std::abs(want);
        if (std::abs(f.jet(i, true) - want) > 1e-9 * scale ||
            std::abs(f.jet(i, false) - want) > 1e-9 * scale)
            throw std::logic_error("make_test_function: jet correction failed");
    }
    return f;
}

// Named members used across the experiments and tests.
inline TestFunction preset_test_function(const std::string& name, double alpha) {
    TestFunctionSpec spec;
    if (name == "smooth") {
        spec.jump = 0.0;
        spec.order = 5;
        spec.correction_width = 1.5;
        spec.terms = {{TermSide::Both, {1.0}, 0.0, 1.5}};
    } else if (name == "jump") {
        spec.jump = 0.5;
        spec.order = 5;
        spec.correction_width = 1.0;
        spec.terms = {{TermSide::Both, {0.8}, 0.0, 1.2},
                      {TermSide::Right, {0.25, 0.10, 0.30}, 0.0, 1.0}};
    } else if (name == "jump2") {
        spec.jump = -0.3;
        spec.order = 5;
        spec.correction_width = 0.8;
        spec.terms = {{TermSide::Both, {0.6}, 0.0, 0.9},
                      {TermSide::Left, {0.20, -0.15, 0.10}, 0.0, 1.1}};
    } else if (name == "far") {
        spec.jump = 0.0;
        spec.order = 3;
        spec.correction_width = 1.0;
        spec.terms = {{TermSide::Both, {1.0}, 5.0, 0.8}};
    } else {
        throw std::invalid_argument("preset_test_function: unknown preset '" + name + "'");
    }
    return make_test_function(spec, alpha);
}

// Robin Laplacian / gradient on S_alpha: plain derivatives off the origin,
// right limits at u = 0.
inline double robin_laplacian(const TestFunction& f, double u) {
    return f.derivative_value(2, u, true);
}
inline double robin_gradient(const TestFunction& f, double u) {
    return f.derivative_value(1, u, true);
}

}  // namespace slowbond
