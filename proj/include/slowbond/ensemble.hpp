#pragma once

// Replica management for the exclusion simulation.  Replicas are independent
// given (base seed, replica index); results are stored per replica and
// reduced with pairwise sums, so aggregates are bit-identical for a fixed
// seed regardless of the number of workers.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "slowbond/exclusion.hpp"
#include "slowbond/stats.hpp"

namespace slowbond {

struct EnsembleSpec {
    ModelParams p;
    Window1D window;
    const InitialProfile* profile = nullptr;
    const MeanPath* rho_path = nullptr;  // solver centering; nullptr = constant
    double rho_constant = 0.5;
    std::vector<const FunctionRows*> functions;
    std::vector<double> snapshot_times;
    double t_end = 0.0;
    std::vector<Site> probe_sites;
    std::vector<std::pair<Site, Site>> probe_pairs;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
    bool record_occupancy = false;
};

struct EnsembleResult {
    std::vector<double> snapshot_times;
    // [snapshot][function][replica]
    std::vector<std::vector<std::vector<double>>> field;
    std::vector<std::vector<std::vector<double>>> martingale;
    std::vector<std::vector<std::vector<double>>> qv;
    // [snapshot][probe][replica] occupancy / pair products as 0-1 doubles
    std::vector<std::vector<std::vector<double>>> probe_occ;
    std::vector<std::vector<std::vector<double>>> pair_product;
    // [snapshot][replica], only when record_occupancy was requested
    std::vector<std::vector<Configuration>> occupancy;
    std::int64_t total_events = 0;
};

inline EnsembleResult run_ensemble(const EnsembleSpec& spec) {
    if (spec.replicas == 0) throw std::invalid_argument("run_ensemble: replicas must be >= 1");
    if (spec.profile == nullptr) throw std::invalid_argument("run_ensemble: missing profile");

    // unified probe list (pairs draw from it)
    std::vector<Site> probes = spec.probe_sites;
    for (const auto& [a, b] : spec.probe_pairs) {
        probes.push_back(a);
        probes.push_back(b);
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    const auto probe_index = [&probes](Site x) {
        return static_cast<std::size_t>(
            std::lower_bound(probes.begin(), probes.end(), x) - probes.begin());
    };

    RunSpec run;
    run.p = &spec.p;
    run.window = &spec.window;
    run.rho_path = spec.rho_path;
    run.rho_constant = spec.rho_constant;
    run.functions = spec.functions;
    run.snapshot_times = spec.snapshot_times;
    run.t_end = spec.t_end;
    run.probe_sites = probes;
    run.record_occupancy = spec.record_occupancy;

    const std::size_t K = spec.snapshot_times.size();
    const std::size_t F = spec.functions.size();
    const std::size_t R = spec.replicas;

    EnsembleResult out;
    out.snapshot_times = spec.snapshot_times;
    const auto alloc3 = [&](std::size_t inner) {
        return std::vector<std::vector<std::vector<double>>>(
            K, std::vector<std::vector<double>>(inner, std::vector<double>(R, 0.0)));
    };
    out.field = alloc3(F);
    out.martingale = alloc3(F);
    out.qv = alloc3(F);
    out.probe_occ = alloc3(probes.size());
    out.pair_product = alloc3(spec.probe_pairs.size());
    if (spec.record_occupancy)
        out.occupancy.assign(K, std::vector<Configuration>(R));

    std::vector<std::int64_t> events(R, 0);
    std::vector<std::uint8_t> conserved(R, 1);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(R); ++r) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(r)));
        Configuration init = sample_initial(*spec.profile, spec.window, spec.p.n, rng);
        ExclusionEngine engine(run, std::move(init), rng);
        const RunResult res = engine.run();
        conserved[r] = res.particle_count_initial == res.particle_count_final ? 1 : 0;
        events[r] = res.events;
        for (std::size_t k = 0; k < K && k < res.snapshots.size(); ++k) {
            const SnapshotRecord& snap = res.snapshots[k];
            for (std::size_t i = 0; i < F; ++i) {
                out.field[k][i][r] = snap.field[i];
                out.martingale[k][i][r] = snap.martingale[i];
                out.qv[k][i][r] = snap.qv[i];
            }
            for (std::size_t s = 0; s < probes.size(); ++s)
                out.probe_occ[k][s][r] = snap.probe_occ[s];
            for (std::size_t q = 0; q < spec.probe_pairs.size(); ++q) {
                const auto& [a, b] = spec.probe_pairs[q];
                out.pair_product[k][q][r] =
                    snap.probe_occ[probe_index(a)] * snap.probe_occ[probe_index(b)];
            }
            if (spec.record_occupancy && snap.occupancy)
                out.occupancy[k][r] = *snap.occupancy;
        }
    }
    for (std::size_t r = 0; r < R; ++r)
        if (!conserved[r])
            throw std::logic_error("run_ensemble: particle count not conserved");
    for (std::int64_t e : events) out.total_events += e;
    return out;
}

struct EstimateCi {
    double estimate = 0.0;
    double ci_half_width = 0.0;  // 3 sigma
};

// Empirical occupation mean at a probe site.
inline EstimateCi empirical_mean(const EnsembleResult& res, std::size_t snapshot,
                                 std::size_t probe) {
    const MeanCi m = mean_ci(res.probe_occ[snapshot][probe], 3.0);
    return {m.mean, m.half_width};
}

// Empirical two-point correlation with solver centering:
// mean eta(x) eta(y) - rho(x) rho(y).
inline EstimateCi empirical_correlation(const EnsembleResult& res, std::size_t snapshot,
                                        std::size_t pair, double rho_x, double rho_y) {
    const MeanCi m = mean_ci(res.pair_product[snapshot][pair], 3.0);
    return {m.mean - rho_x * rho_y, m.half_width};
}

}  // namespace slowbond
