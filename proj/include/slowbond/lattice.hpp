#pragma once

// Lattices, windows and the discrete generators shared by every solver and
// walk in the project.
//
// Conventions, used everywhere below:
//   * 1-D sites live on Z; the defect bond is {0,1} with exchange rate
//     alpha/n, every other bond has rate 1.
//   * The 2-D state space is the half plane V = {(x,y) : y >= x+1}.  Edges
//     inside V carry rate 1 except the two families of slow edges
//        (0,y)-(1,y) for y >= 2     (horizontal, columns 0|1)
//        (x,0)-(x,1) for x <= -1    (vertical, rows 0|1),
//     which carry rate alpha/n.  Jumps leaving V do not exist.
//   * Infinite lattices are truncated to finite windows with reflecting
//     (no-flux) boundaries; window sizes follow the Gaussian-tail rule
//     radius >= interest + 6*n*sqrt(2T).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace slowbond {

using Site = std::int64_t;

struct ModelParams {
    int n = 1;           // scaling parameter
    double alpha = 1.0;  // slow-bond strength
    double T = 0.0;      // macroscopic time horizon

    void validate() const {
        if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
        if (!(alpha > 0.0)) throw std::invalid_argument("ModelParams: alpha must be > 0");
        if (!(T >= 0.0)) throw std::invalid_argument("ModelParams: T must be >= 0");
    }
    double slow_rate() const { return alpha / static_cast<double>(n); }
};

// Rate of the 1-D bond {x, x+1}.
inline double bond_rate_1d(Site x, const ModelParams& p) {
    return x == 0 ? p.slow_rate() : 1.0;
}

struct Site2 {
    Site x = 0;
    Site y = 0;
    friend bool operator==(const Site2&, const Site2&) = default;
};

inline bool in_V(Site2 u) { return u.y >= u.x + 1; }
inline bool on_diagonal(Site2 u) { return u.y == u.x + 1; }
inline bool is_vertex01(Site2 u) { return u.x == 0 && u.y == 1; }

// True iff u-v is one of the slow edge families of the set U-script:
// horizontal between columns 0|1 at height >= 2, vertical between rows 0|1
// at x <= -1.  Assumes nothing; non-neighbours return false.
inline bool is_slow_edge_2d(Site2 u, Site2 v) {
    const Site dx = v.x - u.x;
    const Site dy = v.y - u.y;
    if (std::llabs(dx) + std::llabs(dy) != 1) return false;
    if (dy == 0) return std::min(u.x, v.x) == 0 && u.y >= 2;
    return std::min(u.y, v.y) == 0 && u.x <= -1;
}

// Rate of the (undirected) 2-D edge u-v; zero unless u,v are L1-neighbours
// inside V.  Edges joining two U-sites that are not slow (such as
// (0,2)-(0,3)) carry rate 1: only the two slow families above are special.
inline double bond_rate_2d(Site2 u, Site2 v, const ModelParams& p) {
    if (!in_V(u) || !in_V(v)) return 0.0;
    if (std::llabs(v.x - u.x) + std::llabs(v.y - u.y) != 1) return 0.0;
    return is_slow_edge_2d(u, v) ? p.slow_rate() : 1.0;
}

// Finite 1-D window [lo, hi].  Always contains the slow bond.
struct Window1D {
    Site lo = 0;
    Site hi = 0;

    Window1D() = default;
    Window1D(Site lo_, Site hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= 0 && 1 <= hi)) throw std::invalid_argument("Window1D must contain {0,1}");
        if (size() < 4) throw std::invalid_argument("Window1D width must be >= 4");
    }

    std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
    bool contains(Site x) const { return lo <= x && x <= hi; }
    std::size_t index(Site x) const { return static_cast<std::size_t>(x - lo); }
    Site site(std::size_t i) const { return lo + static_cast<Site>(i); }

    // Symmetric-about-the-bond window from the tail rule.  `interest` is the
    // macroscopic radius that must stay unpolluted over horizon T.
    static Window1D for_horizon(const ModelParams& p, double interest) {
        const double r = interest * p.n + 6.0 * p.n * std::sqrt(2.0 * std::max(p.T, 0.0));
        const Site hi = std::max<Site>(2, static_cast<Site>(std::ceil(r)) + 2);
        return Window1D(1 - hi, hi);
    }
};

// Applies the slow-bond generator A_n to f at x; requires both neighbours.
// Out-of-window access is a truncation error by contract.
template <class F>
double apply_generator_1d(F&& f, Site x, const ModelParams& p, const Window1D& w) {
    if (!(w.contains(x - 1) && w.contains(x + 1)))
        throw std::out_of_range("apply_generator_1d: stencil leaves the window");
    return bond_rate_1d(x, p) * (f(x + 1) - f(x)) + bond_rate_1d(x - 1, p) * (f(x - 1) - f(x));
}

// Truncated half-plane window V intersected with [-L, L]^2.
// Rows are indexed by y in [-L+1, L]; row y holds x in [-L, min(y-1, L)].
struct WindowV {
    Site L = 0;

    WindowV() = default;
    explicit WindowV(Site L_) : L(L_) {
        if (L < 2) throw std::invalid_argument("WindowV: L must be >= 2");
    }

    bool contains(Site2 u) const {
        return in_V(u) && std::llabs(u.x) <= L && std::llabs(u.y) <= L;
    }
    Site row_xmin(Site) const { return -L; }
    Site row_xmax(Site y) const { return std::min<Site>(y - 1, L); }
    Site y_min() const { return -L + 1; }
    Site y_max() const { return L; }

    std::size_t site_count() const {
        std::size_t c = 0;
        for (Site y = y_min(); y <= y_max(); ++y)
            c += static_cast<std::size_t>(row_xmax(y) - row_xmin(y) + 1);
        return c;
    }

    std::vector<Site2> neighbors_in_V(Site2 u) const {
        std::vector<Site2> out;
        for (Site2 v : {Site2{u.x - 1, u.y}, Site2{u.x + 1, u.y}, Site2{u.x, u.y - 1},
                        Site2{u.x, u.y + 1}})
            if (contains(v)) out.push_back(v);
        return out;
    }

    static WindowV for_horizon(const ModelParams& p, double interest) {
        const double r = interest * p.n + 6.0 * p.n * std::sqrt(2.0 * std::max(p.T, 0.0));
        return WindowV(std::max<Site>(2, static_cast<Site>(std::ceil(r)) + 2));
    }
};

// Applies the two-particle generator B_n to phi at u.  The sum runs over the
// V-neighbours of u only; window truncation is reflecting.
template <class F>
double apply_generator_2d(F&& phi, Site2 u, const ModelParams& p, const WindowV& w) {
    if (!w.contains(u)) throw std::out_of_range("apply_generator_2d: site outside window");
    double acc = 0.0;
    const double fu = phi(u);
    for (Site2 v : w.neighbors_in_V(u)) acc += bond_rate_2d(u, v, p) * (phi(v) - fu);
    return acc;
}

}  // namespace slowbond
