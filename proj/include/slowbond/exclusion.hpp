#pragma once

// Kinetic Monte Carlo for the accelerated slow-bond exclusion process on a
// reflecting window.
//
// Event sampling: only effective swaps are scheduled.  The discrepant normal
// bonds form one rate class (rate n^2 each, sampled uniformly via an index
// list with O(1) insert/remove), the slow bond its own class (rate alpha n
// when discrepant).  Holding times are exponential at the total effective
// rate, so the simulation is exact in distribution.
//
// Along the trajectory the engine maintains, exactly and incrementally,
//   G   = n^{-1/2} sum_x (n^2 A_n f)(x/n) eta(x)        (Dynkin integrand)
//   Rqv = (1/n) sum_{x!=0} d_x [n Df(x)]^2 + alpha d_0 Df(0)^2
// for each registered test function, where d_x is the bond discrepancy and
// Df(x) = f((x+1)/n) - f(x/n).  Their time integrals accumulate through a
// compensated sum between events, which makes the integral bookkeeping exact
// for the recorded event sequence.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slowbond/lattice.hpp"
#include "slowbond/mean_solver.hpp"
#include "slowbond/profiles.hpp"
#include "slowbond/test_function.hpp"
#include "slowbond/util.hpp"

namespace slowbond {

// Bit-packed occupancy snapshot.
struct Configuration {
    Window1D window;
    std::vector<std::uint64_t> bits;

    static Configuration empty(const Window1D& w) {
        Configuration c;
        c.window = w;
        c.bits.assign((w.size() + 63) / 64, 0);
        return c;
    }
    bool occupied(Site x) const {
        const std::size_t i = window.index(x);
        return (bits[i >> 6] >> (i & 63)) & 1u;
    }
    void set(Site x, bool v) {
        const std::size_t i = window.index(x);
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v)
            bits[i >> 6] |= mask;
        else
            bits[i >> 6] &= ~mask;
    }
    std::int64_t particle_count() const {
        std::int64_t c = 0;
        for (std::uint64_t w : bits) c += std::popcount(w);
        return c;
    }
};

inline Configuration sample_initial(const InitialProfile& rho0, const Window1D& w, int n,
                                    Rng& rng) {
    Configuration c = Configuration::empty(w);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (rng.uniform() < rho0.at_site(w.site(i), n)) c.set(w.site(i), true);
    return c;
}

// Precomputed lattice rows of a test function on a window (shared across
// replicas; read-only during runs).
struct FunctionRows {
    std::vector<double> f_over_sqrt_n;   // f(x/n) / sqrt(n) per site
    std::vector<double> dynkin_row;      // n^{-1/2} (n^2 A_n f)(x/n) per site
    std::vector<double> qv_weight;       // per bond: (1/n)[n Df]^2, alpha Df^2 at 0

    static FunctionRows build(const TestFunction& f, const Window1D& w, const ModelParams& p) {
        FunctionRows r;
        const double n = static_cast<double>(p.n);
        const double sq = std::sqrt(n);
        const std::size_t m = w.size();
        r.f_over_sqrt_n.resize(m);
        r.dynkin_row.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double u = static_cast<double>(w.site(i)) / n;
            r.f_over_sqrt_n[i] = f.value(u) / sq;
        }
        for (std::size_t i = 0; i < m; ++i) {
            const Site x = w.site(i);
            const auto fv = [&](Site z) { return f.value(static_cast<double>(z) / n); };
            // infinite-lattice generator row; the window is sized so that f
            // is numerically zero at the boundary
            const double a = bond_rate_1d(x, p) * (fv(x + 1) - fv(x)) +
                             bond_rate_1d(x - 1, p) * (fv(x - 1) - fv(x));
            r.dynkin_row[i] = n * n * a / sq;
        }
        r.qv_weight.resize(m - 1);
        for (std::size_t b = 0; b + 1 < m; ++b) {
            const Site x = w.site(b);
            const double df = f.value(static_cast<double>(x + 1) / n) -
                              f.value(static_cast<double>(x) / n);
            r.qv_weight[b] = (x == 0) ? p.alpha * df * df : (n * df) * (n * df);
        }
        for (std::size_t b = 0; b + 1 < m; ++b)
            if (w.site(b) != 0) r.qv_weight[b] /= n;
        return r;
    }
};

struct TrajectoryEvent {
    double time;
    Site bond;
};

// Per-snapshot observables of one replica.
struct SnapshotRecord {
    double time = 0.0;
    std::vector<double> field;        // Y_t^n(f) per registered f
    std::vector<double> martingale;   // M_t^n(f)
    std::vector<double> qv;           // <M^n(f)>_t
    std::vector<std::uint8_t> probe_occ;
    std::optional<Configuration> occupancy;  // recorded on request
};

struct RunResult {
    std::vector<SnapshotRecord> snapshots;
    std::int64_t particle_count_initial = 0;
    std::int64_t particle_count_final = 0;
    std::int64_t events = 0;
    std::int64_t slow_crossings = 0;
    std::optional<std::vector<TrajectoryEvent>> event_log;
};

struct RunSpec {
    const ModelParams* p = nullptr;
    const Window1D* window = nullptr;
    // solver-centered means: rho(t, x).  Either a path or a constant.
    const MeanPath* rho_path = nullptr;
    double rho_constant = 0.5;
    std::vector<const FunctionRows*> functions;
    std::vector<double> snapshot_times;  // ascending, within [0, t_end]
    double t_end = 0.0;
    std::vector<Site> probe_sites;
    std::size_t event_log_cap = 0;  // 0 = no log
    bool record_occupancy = false;
};

class ExclusionEngine {
  public:
    ExclusionEngine(const RunSpec& spec, Configuration initial, Rng rng)
        : spec_(spec), rng_(rng), w_(*spec.window), p_(*spec.p) {
        const std::size_t m = w_.size();
        occ_.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            occ_[i] = initial.occupied(w_.site(i)) ? 1 : 0;
        initial_ = std::move(initial);

        slow_bond_index_ = w_.index(0);
        bond_pos_.assign(m - 1, kAbsent);
        for (std::size_t b = 0; b + 1 < m; ++b)
            if (occ_[b] != occ_[b + 1]) mark_discrepant(b);

        const std::size_t nf = spec_.functions.size();
        dynkin_value_.assign(nf, 0.0);
        qv_rate_.assign(nf, 0.0);
        dynkin_integral_.assign(nf, CompensatedSum{});
        qv_integral_.assign(nf, CompensatedSum{});
        for (std::size_t i = 0; i < nf; ++i) {
            const FunctionRows& rows = *spec_.functions[i];
            double g = 0.0;
            for (std::size_t s = 0; s < m; ++s)
                if (occ_[s]) g += rows.dynkin_row[s];
            dynkin_value_[i] = g;
            double q = 0.0;
            for (std::size_t b = 0; b + 1 < m; ++b)
                if (occ_[b] != occ_[b + 1]) q += rows.qv_weight[b];
            qv_rate_[i] = q;
        }
    }

    RunResult run() {
        RunResult out;
        out.particle_count_initial = count_particles();
        if (spec_.event_log_cap > 0) out.event_log.emplace();

        const double n2 = static_cast<double>(p_.n) * p_.n;
        const double slow_rate = p_.alpha * p_.n;  // n^2 * alpha/n

        capture_baseline();
        double now = 0.0;
        std::size_t next_snap = 0;
        // snapshot at t = 0 if requested
        while (next_snap < spec_.snapshot_times.size() &&
               spec_.snapshot_times[next_snap] <= 0.0) {
            out.snapshots.push_back(record_snapshot(0.0));
            ++next_snap;
        }

        while (now < spec_.t_end) {
            const bool slow_active = occ_[slow_bond_index_] != occ_[slow_bond_index_ + 1];
            const double total =
                n2 * static_cast<double>(discrepant_.size()) + (slow_active ? slow_rate : 0.0);
            const double hold =
                total > 0.0 ? rng_.exponential(total) : (spec_.t_end - now) + 1.0;
            double t_event = now + hold;

            // snapshots and integral accrual up to min(event, horizon)
            const double t_stop = std::min(t_event, spec_.t_end);
            while (next_snap < spec_.snapshot_times.size() &&
                   spec_.snapshot_times[next_snap] <= t_stop) {
                const double ts = spec_.snapshot_times[next_snap];
                accrue(ts - now);
                now = ts;
                out.snapshots.push_back(record_snapshot(ts));
                ++next_snap;
            }
            accrue(t_stop - now);
            now = t_stop;
            if (t_event > spec_.t_end || total == 0.0) break;

            // pick the class, then the bond
            std::size_t b;
            const double pick = rng_.uniform() * total;
            if (slow_active && pick >= n2 * static_cast<double>(discrepant_.size())) {
                b = slow_bond_index_;
                ++out.slow_crossings;
            } else {
                b = discrepant_[rng_.index(discrepant_.size())];
            }
            execute_swap(b);
            ++out.events;
            if (out.event_log && out.event_log->size() < spec_.event_log_cap)
                out.event_log->push_back({now, w_.site(b)});
        }

        out.particle_count_final = count_particles();
        return out;
    }

    const std::vector<std::uint8_t>& occupancy() const { return occ_; }

  private:
    static constexpr std::uint32_t kAbsent = 0xffffffffu;

    void mark_discrepant(std::size_t b) {
        if (b == slow_bond_index_) return;  // its own rate class
        bond_pos_[b] = static_cast<std::uint32_t>(discrepant_.size());
        discrepant_.push_back(b);
    }
    void unmark_discrepant(std::size_t b) {
        if (b == slow_bond_index_) return;
        const std::uint32_t pos = bond_pos_[b];
        const std::size_t last = discrepant_.back();
        discrepant_[pos] = last;
        bond_pos_[last] = pos;
        discrepant_.pop_back();
        bond_pos_[b] = kAbsent;
    }

    void toggle_bond(std::size_t b) {
        const bool now_discrepant = occ_[b] != occ_[b + 1];
        for (std::size_t i = 0; i < spec_.functions.size(); ++i) {
            const double wq = spec_.functions[i]->qv_weight[b];
            qv_rate_[i] += now_discrepant ? wq : -wq;
        }
        if (b == slow_bond_index_) return;
        if (now_discrepant) {
            if (bond_pos_[b] == kAbsent) mark_discrepant(b);
        } else {
            if (bond_pos_[b] != kAbsent) unmark_discrepant(b);
        }
    }

    void execute_swap(std::size_t b) {
        // bond b is discrepant by construction
        const double delta = occ_[b + 1] ? 1.0 : -1.0;  // change of occ_[b]
        occ_[b] ^= 1u;
        occ_[b + 1] ^= 1u;
        for (std::size_t i = 0; i < spec_.functions.size(); ++i) {
            const FunctionRows& rows = *spec_.functions[i];
            dynkin_value_[i] += delta * (rows.dynkin_row[b] - rows.dynkin_row[b + 1]);
        }
        if (b > 0) toggle_bond(b - 1);
        if (b + 2 < w_.size()) toggle_bond(b + 1);
        // bond b itself stays discrepant
    }

    void accrue(double dt) {
        if (dt <= 0.0) return;
        for (std::size_t i = 0; i < spec_.functions.size(); ++i) {
            dynkin_integral_[i].add(dynkin_value_[i] * dt);
            qv_integral_[i].add(qv_rate_[i] * dt);
        }
    }

    double rho_at(double t, std::size_t i) const {
        if (spec_.rho_path != nullptr) return spec_.rho_path->value(t, w_.site(i));
        return spec_.rho_constant;
    }

    // Y_0 and sum f rho_0 are the reference points of every martingale value.
    void capture_baseline() {
        const std::size_t nf = spec_.functions.size();
        field0_.assign(nf, 0.0);
        sum_f_rho0_.assign(nf, 0.0);
        for (std::size_t i = 0; i < nf; ++i) {
            const FunctionRows& rows = *spec_.functions[i];
            double sum_f_eta = 0.0, sum_f_rho = 0.0;
            for (std::size_t s = 0; s < w_.size(); ++s) {
                if (occ_[s]) sum_f_eta += rows.f_over_sqrt_n[s];
                sum_f_rho += rows.f_over_sqrt_n[s] * rho_at(0.0, s);
            }
            field0_[i] = sum_f_eta - sum_f_rho;
            sum_f_rho0_[i] = sum_f_rho;
        }
    }

    SnapshotRecord record_snapshot(double t) {
        SnapshotRecord rec;
        rec.time = t;
        const std::size_t nf = spec_.functions.size();
        rec.field.resize(nf);
        rec.martingale.resize(nf);
        rec.qv.resize(nf);
        for (std::size_t i = 0; i < nf; ++i) {
            const FunctionRows& rows = *spec_.functions[i];
            double sum_f_eta = 0.0;
            double sum_f_rho = 0.0;
            for (std::size_t s = 0; s < w_.size(); ++s) {
                if (occ_[s]) sum_f_eta += rows.f_over_sqrt_n[s];
                sum_f_rho += rows.f_over_sqrt_n[s] * rho_at(t, s);
            }
            rec.field[i] = sum_f_eta - sum_f_rho;
            // M_t = Y_t - Y_0 - I_eta + I_rho with
            // I_rho = n^{-1/2} [sum f rho_t - sum f rho_0]:  A_n is symmetric
            // and rho solves the same forward equation, so the deterministic
            // part of the Dynkin integral telescopes.
            const double i_rho = sum_f_rho - sum_f_rho0_[i];
            rec.martingale[i] =
                rec.field[i] - field0_[i] - dynkin_integral_[i].value() + i_rho;
            rec.qv[i] = qv_integral_[i].value();
        }
        rec.probe_occ.reserve(spec_.probe_sites.size());
        for (Site x : spec_.probe_sites)
            rec.probe_occ.push_back(occ_[w_.index(x)]);
        if (spec_.record_occupancy) {
            Configuration c = Configuration::empty(w_);
            for (std::size_t i = 0; i < w_.size(); ++i)
                if (occ_[i]) c.set(w_.site(i), true);
            rec.occupancy = std::move(c);
        }
        return rec;
    }

    std::int64_t count_particles() const {
        std::int64_t c = 0;
        for (std::uint8_t v : occ_) c += v;
        return c;
    }

    RunSpec spec_;
    Rng rng_;
    Window1D w_;
    ModelParams p_;
    Configuration initial_;
    std::vector<std::uint8_t> occ_;
    std::size_t slow_bond_index_ = 0;
    std::vector<std::size_t> discrepant_;
    std::vector<std::uint32_t> bond_pos_;
    std::vector<double> dynkin_value_;
    std::vector<double> qv_rate_;
    std::vector<CompensatedSum> dynkin_integral_;
    std::vector<CompensatedSum> qv_integral_;
    std::vector<double> field0_;
    std::vector<double> sum_f_rho0_;
};

// Density fluctuation field of a configuration against a given mean row:
// n^{-1/2} sum_x f(x/n) (eta(x) - rho(x)).
inline double density_field(const Configuration& c, const TestFunction& f,
                            const std::function<double(Site)>& rho, int n) {
    const double sq = std::sqrt(static_cast<double>(n));
    double acc = 0.0;
    for (std::size_t i = 0; i < c.window.size(); ++i) {
        const Site x = c.window.site(i);
        const double fv = f.value(static_cast<double>(x) / n);
        acc += fv * ((c.occupied(x) ? 1.0 : 0.0) - rho(x));
    }
    return acc / sq;
}

}  // namespace slowbond
