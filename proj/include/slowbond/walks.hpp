#pragma once

// The random walks of the local-time analysis, one rate model per walk, and
// an event-driven simulator that is exact in distribution (exponential
// holding times at the state's total rate, jump chosen proportionally).
//
// Local times accumulate full holding times truncated at the horizon, so
// L_t(A) + L_t(A^c) = t holds exactly, event by event.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "slowbond/lattice.hpp"
#include "slowbond/util.hpp"

namespace slowbond {

// ---------------------------------------------------------------------------
// 1-D walks (state = Site)

struct Slow1DWalk {
    using State = Site;
    ModelParams p;

    template <class F>
    void rates(State x, F&& f) const {
        f(x + 1, bond_rate_1d(x, p));
        f(x - 1, bond_rate_1d(x - 1, p));
    }
    bool slow_edge(State a, State b) const {
        return (a == 0 && b == 1) || (a == 1 && b == 0);
    }
    bool in_space(State) const { return true; }
};

struct Simple1DRate2Walk {
    using State = Site;
    template <class F>
    void rates(State x, F&& f) const {
        f(x + 1, 1.0);
        f(x - 1, 1.0);
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State) const { return true; }
};

// Simple walk on {1, 2, ...} reflected at 1 (rate 1 to each neighbour that
// exists).
struct ReflectedHalflineWalk {
    using State = Site;
    template <class F>
    void rates(State x, F&& f) const {
        f(x + 1, 1.0);
        if (x - 1 >= 1) f(x - 1, 1.0);
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State x) const { return x >= 1; }
};

// ---------------------------------------------------------------------------
// 2-D walks (state = Site2)

namespace detail {
template <class F>
void four_neighbors(Site2 u, F&& f) {
    f(Site2{u.x - 1, u.y});
    f(Site2{u.x + 1, u.y});
    f(Site2{u.x, u.y - 1});
    f(Site2{u.x, u.y + 1});
}
}  // namespace detail

// The two-particle walk on V with generator B_n.
struct Slow2DWalk {
    using State = Site2;
    ModelParams p;

    template <class F>
    void rates(State u, F&& f) const {
        detail::four_neighbors(u, [&](Site2 v) {
            if (in_V(v)) f(v, bond_rate_2d(u, v, p));
        });
    }
    bool slow_edge(State u, State v) const {
        return in_V(u) && in_V(v) && is_slow_edge_2d(u, v);
    }
    bool in_space(State u) const { return in_V(u); }
};

struct Simple2DRate2Walk {
    using State = Site2;
    template <class F>
    void rates(State u, F&& f) const {
        detail::four_neighbors(u, [&](Site2 v) { f(v, 0.5); });
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State) const { return true; }
};

// Simple walk reflected on W = {0 <= x <= y}, rate 1 per edge inside W.
struct TriangleWWalk {
    using State = Site2;
    static bool in_W(Site2 u) { return 0 <= u.x && u.x <= u.y; }
    template <class F>
    void rates(State u, F&& f) const {
        detail::four_neighbors(u, [&](Site2 v) {
            if (in_W(v)) f(v, 1.0);
        });
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State u) const { return in_W(u); }
};

// Simple walk on the closed quadrant, rate 1/2 per edge inside it (the
// lumped image of the rate-2 plane walk under the quadrant fold).
struct QuadrantHalfWalk {
    using State = Site2;
    static bool in_Q(Site2 u) { return u.x >= 0 && u.y >= 0; }
    template <class F>
    void rates(State u, F&& f) const {
        detail::four_neighbors(u, [&](Site2 v) {
            if (in_Q(v)) f(v, 0.5);
        });
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State u) const { return in_Q(u); }
};

// Rate-1 walk on V: the alpha = n limit of Slow2DWalk, built independently.
struct VWalkRate1 {
    using State = Site2;
    template <class F>
    void rates(State u, F&& f) const {
        detail::four_neighbors(u, [&](Site2 v) {
            if (in_V(v)) f(v, 1.0);
        });
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State u) const { return in_V(u); }
};

// Chain assembled from a shared jump skeleton and a per-state holding rate,
// the object of the rate-comparison coupling check.
struct SkeletonPathWalk {
    using State = Site;
    Site lo = 0, hi = 0;
    std::vector<double> holding;  // indexed by x - lo

    double rate_of(State x) const { return holding[static_cast<std::size_t>(x - lo)]; }

    template <class F>
    void rates(State x, F&& f) const {
        const double lam = rate_of(x);
        if (x == lo)
            f(x + 1, lam);
        else if (x == hi)
            f(x - 1, lam);
        else {
            f(x + 1, 0.5 * lam);
            f(x - 1, 0.5 * lam);
        }
    }
    bool slow_edge(State, State) const { return false; }
    bool in_space(State x) const { return lo <= x && x <= hi; }
};

// ---------------------------------------------------------------------------
// Simulation

struct LocalTimeRecord {
    std::vector<double> local_time;  // one entry per target set
    std::int64_t crossings = 0;      // slow-edge traversals
    double t = 0.0;
};

// Runs one trajectory to (microscopic) horizon t.  `targets` are membership
// predicates over states.
template <class Walk>
LocalTimeRecord simulate_walk(
    const Walk& walk, typename Walk::State start, double t,
    const std::vector<std::function<bool(typename Walk::State)>>& targets, Rng& rng) {
    if (t < 0.0) throw std::invalid_argument("simulate_walk: t must be >= 0");
    if (!walk.in_space(start)) throw std::invalid_argument("simulate_walk: start outside space");

    LocalTimeRecord rec;
    rec.local_time.assign(targets.size(), 0.0);
    rec.t = t;

    using State = typename Walk::State;
    State u = start;
    double now = 0.0;
    std::vector<std::pair<State, double>> moves;
    while (now < t) {
        moves.clear();
        double total = 0.0;
        walk.rates(u, [&](State v, double r) {
            if (r > 0.0) {
                moves.emplace_back(v, r);
                total += r;
            }
        });
        const double hold = total > 0.0 ? rng.exponential(total) : (t - now) + 1.0;
        const double dwell = std::min(hold, t - now);
        for (std::size_t a = 0; a < targets.size(); ++a)
            if (targets[a](u)) rec.local_time[a] += dwell;
        now += hold;
        if (now >= t || total == 0.0) break;

        double pick = rng.uniform() * total;
        State v = moves.back().first;
        for (const auto& [cand, r] : moves) {
            pick -= r;
            if (pick <= 0.0) {
                v = cand;
                break;
            }
        }
        if (walk.slow_edge(u, v)) ++rec.crossings;
        u = v;
    }
    return rec;
}

}  // namespace slowbond
