#pragma once

// Exact transition probabilities on truncated windows (the oracle behind the
// folding, lumping and occupation checks) plus the Monte-Carlo local-time
// estimators of the two-dimensional analysis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "slowbond/lattice.hpp"
#include "slowbond/stats.hpp"
#include "slowbond/uniformization.hpp"
#include "slowbond/util.hpp"
#include "slowbond/walks.hpp"

namespace slowbond {

inline constexpr std::size_t kMaxOracleStates = 40000;

struct Site2Hash {
    std::size_t operator()(const Site2& u) const {
        std::uint64_t s = static_cast<std::uint64_t>(u.x) * 0x9E3779B97F4A7C15ull +
                          static_cast<std::uint64_t>(u.y);
        return static_cast<std::size_t>(splitmix64(s));
    }
};
struct SiteHash {
    std::size_t operator()(Site x) const {
        auto s = static_cast<std::uint64_t>(x);
        return static_cast<std::size_t>(splitmix64(s));
    }
};

template <class State>
struct StateHashFor;
template <>
struct StateHashFor<Site> {
    using type = SiteHash;
};
template <>
struct StateHashFor<Site2> {
    using type = Site2Hash;
};

// Finite state window enumerated in a fixed (lexicographic) order.
template <class State>
class StateSpace {
  public:
    explicit StateSpace(std::vector<State> states) : states_(std::move(states)) {
        if (states_.size() > kMaxOracleStates)
            throw std::invalid_argument("StateSpace: state count exceeds oracle cap");
        index_.reserve(states_.size() * 2);
        for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
    }
    std::size_t size() const { return states_.size(); }
    const State& state(std::size_t i) const { return states_[i]; }
    const std::vector<State>& states() const { return states_; }
    bool contains(const State& s) const { return index_.count(s) != 0; }
    std::size_t index_of(const State& s) const {
        auto it = index_.find(s);
        if (it == index_.end()) throw std::out_of_range("StateSpace: state outside window");
        return it->second;
    }

  private:
    std::vector<State> states_;
    std::unordered_map<State, std::size_t, typename StateHashFor<State>::type> index_;
};

template <class Walk>
StateSpace<Site> make_space_1d(const Walk& walk, Site lo, Site hi) {
    std::vector<Site> st;
    for (Site x = lo; x <= hi; ++x)
        if (walk.in_space(x)) st.push_back(x);
    return StateSpace<Site>(std::move(st));
}

template <class Walk>
StateSpace<Site2> make_space_2d(const Walk& walk, Site xlo, Site xhi, Site ylo, Site yhi) {
    std::vector<Site2> st;
    for (Site y = ylo; y <= yhi; ++y)
        for (Site x = xlo; x <= xhi; ++x)
            if (walk.in_space(Site2{x, y})) st.push_back(Site2{x, y});
    return StateSpace<Site2>(std::move(st));
}

// Reflecting truncation: jumps leaving the window are dropped.
template <class Walk>
SparseChain build_chain(const Walk& walk, const StateSpace<typename Walk::State>& space) {
    SparseChain c;
    c.size = space.size();
    c.row_ptr.assign(c.size + 1, 0);
    c.exit_rate.assign(c.size, 0.0);
    for (std::size_t i = 0; i < c.size; ++i) {
        c.row_ptr[i] = c.col.size();
        walk.rates(space.state(i), [&](typename Walk::State v, double r) {
            if (r > 0.0 && space.contains(v)) {
                c.col.push_back(space.index_of(v));
                c.rate.push_back(r);
                c.exit_rate[i] += r;
            }
        });
    }
    c.row_ptr[c.size] = c.col.size();
    c.max_exit = 0.0;
    for (double e : c.exit_rate) c.max_exit = std::max(c.max_exit, e);
    return c;
}

// P_x[Z_t = y] for the requested starts, on a shared window.
template <class State>
struct TransitionTable {
    double t = 0.0;
    std::vector<State> starts;
    std::vector<std::vector<double>> rows;  // rows[s][j] over the window states
};

template <class Walk>
TransitionTable<typename Walk::State> transition_probabilities(
    const Walk& walk, const StateSpace<typename Walk::State>& space,
    const std::vector<typename Walk::State>& starts, double t, double tol = 1e-13) {
    const SparseChain chain = build_chain(walk, space);
    TransitionTable<typename Walk::State> table;
    table.t = t;
    table.starts = starts;
    table.rows.reserve(starts.size());
    for (const auto& s : starts) {
        std::vector<double> p0(space.size(), 0.0);
        p0[space.index_of(s)] = 1.0;
        table.rows.push_back(transient_distribution(chain, std::move(p0), t, tol));
    }
    return table;
}

// Number of jumps that covers the horizon up to probability `tol`; a walk
// cannot travel farther than its jump count, so maxcoord + this radius gives
// an exact (to tol) window for point probabilities.
inline Site travel_radius(double max_exit_rate, double t, double tol = 1e-13) {
    return static_cast<Site>(poisson_window(max_exit_rate * t, tol).k_hi) + 2;
}

// ---------------------------------------------------------------------------
// Heat-kernel folding (slow-bond walk vs rate-2 walk)

struct FoldingCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double diff = 0.0;
};

inline FoldingCheck heat_kernel_folding_check(Site x, Site y, double t, const ModelParams& p) {
    const Slow1DWalk slow{p};
    const Simple1DRate2Walk simple;
    const double max_rate = std::max(2.0, 1.0 + p.slow_rate());
    const Site reach = std::max({std::llabs(x), std::llabs(y), std::llabs(1 - y)}) +
                       travel_radius(max_rate, t);
    const auto space = make_space_1d(slow, -reach, reach);

    const auto row_slow = transition_probabilities(slow, space, {x}, t).rows[0];
    const auto row_simple = transition_probabilities(simple, space, {x}, t).rows[0];

    FoldingCheck fc;
    const std::size_t iy = space.index_of(y);
    const std::size_t iy2 = space.index_of(-y + 1);
    fc.lhs = row_slow[iy] + row_slow[iy2];
    fc.rhs = row_simple[iy] + row_simple[iy2];
    fc.diff = std::abs(fc.lhs - fc.rhs);
    return fc;
}

// ---------------------------------------------------------------------------
// Lumping (Markov-chain projection)

// Verifies the projection condition: for x ~ x' and every class C,
//     sum_{y' in C} rate(x, y') == sum_{y' in C} rate(x', y').
// Returns a human-readable description of the first violating pair, if any.
template <class Walk, class Relation>
std::string check_lumping_condition(const Walk& walk,
                                    const StateSpace<typename Walk::State>& space,
                                    Relation&& representative, double tol = 1e-12) {
    using State = typename Walk::State;
    using ClassRates = std::map<std::size_t, double>;

    std::unordered_map<State, std::size_t, typename StateHashFor<State>::type> class_id;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const State rep = representative(space.state(i));
        auto [it, inserted] = class_id.emplace(rep, members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(i);
    }

    const auto rates_by_class = [&](std::size_t i) {
        ClassRates out;
        walk.rates(space.state(i), [&](State v, double r) {
            if (r > 0.0 && space.contains(v)) out[class_id.at(representative(v))] += r;
        });
        return out;
    };

    for (const auto& cls : members) {
        if (cls.size() < 2) continue;
        const ClassRates ref = rates_by_class(cls.front());
        for (std::size_t m = 1; m < cls.size(); ++m) {
            const ClassRates other = rates_by_class(cls[m]);
            ClassRates all = ref;
            for (const auto& [c, r] : other) all.try_emplace(c, 0.0);
            for (const auto& [c, unused] : all) {
                const auto get = [c = c](const ClassRates& cr) {
                    auto it = cr.find(c);
                    return it == cr.end() ? 0.0 : it->second;
                };
                if (std::abs(get(ref) - get(other)) > tol) {
                    std::ostringstream os;
                    os << "lumping condition fails for equivalent states #"
                       << cls.front() << " and #" << cls[m] << " toward class #" << c;
                    return os.str();
                }
            }
        }
    }
    return {};
}

// Compares the folded fine-chain distribution at time t with the coarse
// chain's.  `representative` must map fine states onto coarse states.
template <class FineWalk, class CoarseWalk, class Relation>
double lumping_check(const FineWalk& fine, const StateSpace<typename FineWalk::State>& fine_space,
                     Relation&& representative, const CoarseWalk& coarse,
                     const StateSpace<typename CoarseWalk::State>& coarse_space,
                     typename FineWalk::State start, double t) {
    const std::string violation = check_lumping_condition(fine, fine_space, representative);
    if (!violation.empty()) throw std::invalid_argument(violation);

    const auto fine_row = transition_probabilities(fine, fine_space, {start}, t).rows[0];
    std::vector<double> folded(coarse_space.size(), 0.0);
    for (std::size_t i = 0; i < fine_space.size(); ++i)
        folded[coarse_space.index_of(representative(fine_space.state(i)))] += fine_row[i];

    const auto coarse_row =
        transition_probabilities(coarse, coarse_space, {representative(start)}, t).rows[0];

    double max_diff = 0.0;
    for (std::size_t j = 0; j < coarse_space.size(); ++j)
        max_diff = std::max(max_diff, std::abs(folded[j] - coarse_row[j]));
    return max_diff;
}

// ---------------------------------------------------------------------------
// Rate-comparison coupling (faster chain spends less time anywhere)

struct MonotonicityCheck {
    double fast_mean = 0.0, fast_ci = 0.0;   // E L_t(A), 3 sigma half-width
    double slow_mean = 0.0, slow_ci = 0.0;   // E L_{Lambda t}(A)
    double lambda_ratio = 1.0;
};

inline MonotonicityCheck rate_monotonicity_check(Site lo, Site hi,
                                                 const std::vector<double>& holding_slow,
                                                 const std::vector<double>& holding_fast,
                                                 const std::function<bool(Site)>& target,
                                                 double t, std::size_t replicas, Site start,
                                                 std::uint64_t seed) {
    if (holding_slow.size() != holding_fast.size() ||
        holding_slow.size() != static_cast<std::size_t>(hi - lo + 1))
        throw std::invalid_argument("rate_monotonicity_check: rate vector size mismatch");
    double lambda = 0.0;
    for (std::size_t i = 0; i < holding_slow.size(); ++i) {
        if (!(holding_slow[i] > 0.0 && holding_fast[i] > 0.0))
            throw std::invalid_argument("rate_monotonicity_check: rates must be positive");
        lambda = std::max(lambda, holding_fast[i] / holding_slow[i]);
    }
    const SkeletonPathWalk slow{lo, hi, holding_slow};
    const SkeletonPathWalk fast{lo, hi, holding_fast};
    const std::vector<std::function<bool(Site)>> targets{target};

    std::vector<double> lf(replicas), ls(replicas);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(replicas); ++r) {
        Rng rng_f(derive_seed(seed, 2 * static_cast<std::uint64_t>(r)));
        Rng rng_s(derive_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1));
        lf[r] = simulate_walk(fast, start, t, targets, rng_f).local_time[0];
        ls[r] = simulate_walk(slow, start, lambda * t, targets, rng_s).local_time[0];
    }
    MonotonicityCheck mc;
    mc.lambda_ratio = lambda;
    const MeanCi f = mean_ci(lf, 3.0);
    const MeanCi s = mean_ci(ls, 3.0);
    mc.fast_mean = f.mean;
    mc.fast_ci = f.half_width;
    mc.slow_mean = s.mean;
    mc.slow_ci = s.half_width;
    return mc;
}

// ---------------------------------------------------------------------------
// Two-dimensional local times (Monte Carlo)

struct LocalTimeRow {
    int n = 0;
    double t = 0.0;  // macroscopic; horizon simulated is t n^2
    double alpha = 0.0;
    Site2 start{};
    double diag_mean = 0.0, diag_ci = 0.0;      // E L(D \ {(0,1)})
    double vertex_mean = 0.0, vertex_ci = 0.0;  // E L({(0,1)})
    double crossings_mean = 0.0, crossings_ci = 0.0;
    double diag_normalized = 0.0;    // E L / (n sqrt(t))
    double vertex_normalized = 0.0;  // E L / log(t n^2)
};

inline LocalTimeRow local_time_bounds_2d(const ModelParams& p, double t_macro, Site2 start,
                                         std::size_t replicas, std::uint64_t seed) {
    const Slow2DWalk walk{p};
    const double horizon = t_macro * p.n * p.n;
    const std::vector<std::function<bool(Site2)>> targets{
        [](Site2 u) { return on_diagonal(u) && !is_vertex01(u); },
        [](Site2 u) { return is_vertex01(u); }};

    std::vector<double> diag(replicas), vert(replicas), cross(replicas);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(replicas); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        const LocalTimeRecord rec = simulate_walk(walk, start, horizon, targets, rng);
        diag[r] = rec.local_time[0];
        vert[r] = rec.local_time[1];
        cross[r] = static_cast<double>(rec.crossings);
    }

    LocalTimeRow row;
    row.n = p.n;
    row.t = t_macro;
    row.alpha = p.alpha;
    row.start = start;
    const MeanCi d = mean_ci(diag, 3.0);
    const MeanCi v = mean_ci(vert, 3.0);
    const MeanCi c = mean_ci(cross, 3.0);
    row.diag_mean = d.mean;
    row.diag_ci = d.half_width;
    row.vertex_mean = v.mean;
    row.vertex_ci = v.half_width;
    row.crossings_mean = c.mean;
    row.crossings_ci = c.half_width;
    row.diag_normalized = d.mean / (p.n * std::sqrt(t_macro));
    row.vertex_normalized = v.mean / std::log(std::max(horizon, 2.0));
    return row;
}

// ---------------------------------------------------------------------------
// Occupation integrals  int_0^t P[Z_s in target] ds
// Composite Simpson over transition-probability snapshots with one Richardson
// extrapolation per refinement; the caller supplies the window.

template <class Walk>
double occupation_integral(const Walk& walk, const StateSpace<typename Walk::State>& space,
                           typename Walk::State start,
                           const std::function<bool(typename Walk::State)>& target, double t,
                           double tol = 1e-6) {
    if (t <= 0.0) return 0.0;
    const SparseChain chain = build_chain(walk, space);
    std::vector<std::size_t> target_idx;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (target(space.state(i))) target_idx.push_back(i);

    const auto target_mass = [&](const std::vector<double>& pvec) {
        double m = 0.0;
        for (std::size_t i : target_idx) m += pvec[i];
        return m;
    };

    const auto simpson = [&](std::size_t intervals) {
        std::vector<double> pvec(space.size(), 0.0);
        pvec[space.index_of(start)] = 1.0;
        const double h = t / static_cast<double>(intervals);
        double acc = target_mass(pvec);  // endpoint weight 1
        for (std::size_t k = 1; k <= intervals; ++k) {
            pvec = transient_distribution(chain, std::move(pvec), h);
            const double w = (k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
            acc += w * target_mass(pvec);
        }
        return acc * h / 3.0;
    };

    // resolve the initial transient (time scale 1/max_exit) from the start
    std::size_t intervals = 32;
    const double scale = std::max(1.0, t * std::max(chain.max_exit, 1.0) / 4.0);
    while (static_cast<double>(intervals) < scale && intervals < (1u << 14)) intervals *= 2;
    double coarse = simpson(intervals);
    for (int pass = 0; pass < 8; ++pass) {
        intervals *= 2;
        const double fine = simpson(intervals);
        const double richardson = (16.0 * fine - coarse) / 15.0;
        if (std::abs(fine - coarse) / 15.0 < tol) return richardson;
        coarse = fine;
    }
    throw std::runtime_error("occupation_integral: did not reach tolerance");
}

}  // namespace slowbond
