#pragma once

// Experiment runners behind the CLI and the acceptance suite.  Each runner
// executes one named experiment, writes its CSV artifacts and a manifest,
// and reports per-criterion verdicts.  verify_all() strings the runners
// together: the fast tier covers every deterministic/oracle check, the full
// tier adds the Monte-Carlo criteria.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slowbond/config.hpp"
#include "slowbond/correlation_solver.hpp"
#include "slowbond/csv.hpp"
#include "slowbond/duhamel.hpp"
#include "slowbond/ensemble.hpp"
#include "slowbond/fluctuations.hpp"
#include "slowbond/manifest.hpp"
#include "slowbond/mean_solver.hpp"
#include "slowbond/ou.hpp"
#include "slowbond/semigroup.hpp"
#include "slowbond/walk_oracle.hpp"

namespace slowbond::experiments {

namespace fs = std::filesystem;

// Regression floor for the lower-bound experiment (step(1/2,1/4), alpha=0.1,
// n=128, T=0.1): sup|phi| n/log n measured 3.141e-3 at first run; the floor
// asserts half of that so the mechanism cannot silently degrade.
inline constexpr double kLowerBoundFloor = 1.5e-3;

inline CriterionOutcome make_criterion(std::string name, double value, double threshold,
                                       const std::string& cmp) {
    CriterionOutcome c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.comparison = cmp;
    if (cmp == "<=")
        c.pass = value <= threshold;
    else if (cmp == "<")
        c.pass = value < threshold;
    else if (cmp == ">=")
        c.pass = value >= threshold;
    else
        c.pass = false;
    return c;
}

// ---------------------------------------------------------------------------
// mean-scaling: discrete-derivative estimate across the n sweep

inline RunManifest run_mean_scaling(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("mean-scaling", ec.raw.hash());
    fs::create_directories(out);
    CsvWriter csv(out / "gradient_sup.csv",
                  {"n", "sup_grad", "at_t", "at_x", "bond_gap_sup"});
    man.add_artifact(csv.path());

    const InitialProfile profile = ec.make_profile();
    std::vector<double> sups;
    for (int n : ec.n_sweep) {
        const ModelParams p{n, ec.alpha, ec.T};
        const Window1D w = Window1D::for_horizon(p, ec.interest + 1.0);
        const MeanPath path = evolve_mean_path(profile, p, w);
        const GradientSup g = path.tracked_gradient_sup();
        csv.row(n, g.value, g.at_time, static_cast<long long>(g.at_site), g.diag_at_bond0);
        sups.push_back(g.value);
        if (g.diag_at_bond0 > 1.0)
            man.add_criterion(make_criterion("bond_gap_bounded_n" + std::to_string(n),
                                             g.diag_at_bond0, 1.0, "<="));
        if (n == ec.n_sweep.back()) {
            CsvWriter field(out / "mean_field.csv", {"t", "x", "value"});
            man.add_artifact(field.path());
            const std::size_t k_step = std::max<std::size_t>(1, path.snapshot_count() / 5);
            for (std::size_t k = 0; k < path.snapshot_count(); k += k_step)
                for (Site x = std::max<Site>(w.lo, -4 * n); x <= std::min<Site>(w.hi, 4 * n);
                     ++x)
                    field.row(path.snapshot_time(k), static_cast<long long>(x),
                              path.snapshot(k)[w.index(x)]);
        }
    }
    if (sups.size() >= 2)
        man.add_criterion(
            make_criterion("gradient_sup_ratio_spread", ratio_spread(sups), 2.0, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// correlation-scaling: sup correlation * n/log n across the n sweep

inline RunManifest run_correlation_scaling(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("correlation-scaling", ec.raw.hash());
    fs::create_directories(out);
    CsvWriter csv(out / "correlation_scaling.csv", {"n", "sup_phi", "normalized"});
    man.add_artifact(csv.path());

    const InitialProfile profile = ec.make_profile();
    std::vector<double> normalized;
    for (int n : ec.n_sweep) {
        const ModelParams p{n, ec.alpha, ec.T};
        if (n == ec.n_sweep.back()) {
            // emit a near-diagonal field slice alongside the scaling table
            const WindowV wv = WindowV::for_horizon(p, ec.interest);
            const Window1D w1 =
                Window1D::for_horizon(p, static_cast<double>(wv.L) / p.n + 0.5);
            const MeanPath path = evolve_mean_path(profile, p, w1, {.track_gradient = false});
            const CorrelationRun run =
                evolve_correlation(CorrelationField::zero(wv), path, p, p.T);
            CsvWriter field(out / "correlation_field.csv", {"t", "x", "y", "value"});
            man.add_artifact(field.path());
            const Site span = std::min<Site>(wv.L - 1, 2 * n);
            for (Site x = -span; x <= span; ++x)
                for (Site y = x + 1; y <= std::min<Site>(x + 5, wv.L); ++y)
                    field.row(p.T, static_cast<long long>(x), static_cast<long long>(y),
                              run.field.at(x, y));
            csv.row(p.n, run.sup_abs,
                    run.sup_abs * p.n / std::log(static_cast<double>(p.n)));
            normalized.push_back(run.sup_abs * p.n / std::log(static_cast<double>(p.n)));
            continue;
        }
        const CorrelationScalingRow row = correlation_scaling_row(profile, p, ec.interest);
        csv.row(row.n, row.sup_phi, row.normalized);
        normalized.push_back(row.normalized);
    }
    if (normalized.size() >= 2)
        man.add_criterion(make_criterion("normalized_sup_ratio_spread",
                                         ratio_spread(normalized), 2.0, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// lower-bound: the step-profile mechanism keeps a mean gap and a correlation
// floor across the slow bond

inline RunManifest run_lower_bound(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("lower-bound", ec.raw.hash());
    fs::create_directories(out);

    const int n = ec.n_sweep.back();
    const ModelParams p{n, ec.alpha, ec.T};
    const InitialProfile profile = ec.make_profile();

    const WindowV wv = WindowV::for_horizon(p, ec.interest);
    const Window1D w1 =
        Window1D::for_horizon(p, static_cast<double>(wv.L) / p.n + 0.5);
    const MeanPath path = evolve_mean_path(profile, p, w1, {.track_gradient = false});

    CsvWriter gap_csv(out / "mean_gap.csv", {"t", "gap"});
    man.add_artifact(gap_csv.path());
    double min_gap = 1.0;
    for (std::size_t k = 0; k < path.snapshot_count(); ++k) {
        const double t = path.snapshot_time(k);
        const double gap = path.snapshot(k)[w1.index(0)] - path.snapshot(k)[w1.index(1)];
        gap_csv.row(t, gap);
        if (t >= 0.01) min_gap = std::min(min_gap, gap);
    }
    man.add_criterion(make_criterion("mean_gap_min_on_[0.01,T]", min_gap, 0.05, ">="));

    const CorrelationRun run =
        evolve_correlation(CorrelationField::zero(wv), path, p, p.T);
    const double normalized = run.sup_abs * p.n / std::log(static_cast<double>(p.n));
    CsvWriter sc(out / "correlation_floor.csv", {"n", "sup_phi", "normalized"});
    man.add_artifact(sc.path());
    sc.row(p.n, run.sup_abs, normalized);
    const double floor = ec.floor > 0.0 ? ec.floor : kLowerBoundFloor;
    if (floor > 0.0)
        man.add_criterion(
            make_criterion("normalized_sup_floor", normalized, floor, ">="));
    else
        man.add_criterion(make_criterion("normalized_sup_positive", normalized, 0.0, ">="));
    return man;
}

// ---------------------------------------------------------------------------
// folding: the exact heat-kernel identity between the slow-bond walk and the
// rate-2 walk

inline RunManifest run_folding(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("folding", ec.raw.hash());
    fs::create_directories(out);
    CsvWriter csv(out / "folding.csv", {"x", "y", "t", "alpha", "lhs", "rhs", "diff"});
    man.add_artifact(csv.path());

    double max_diff = 0.0;
    for (double alpha : {0.1, 1.0, 10.0}) {
        const ModelParams p{8, alpha, 0.0};
        for (double t : {0.5, 1.0, 2.0}) {
            // one chain pair per (alpha, t); rows for all starts at once
            const Slow1DWalk slow{p};
            const Simple1DRate2Walk simple;
            const double max_rate = std::max(2.0, 1.0 + p.slow_rate());
            const Site reach = 21 + travel_radius(max_rate, t);
            const auto space = make_space_1d(slow, -reach, reach);
            std::vector<Site> starts;
            for (Site x = -20; x <= 20; ++x) starts.push_back(x);
            const auto slow_table = transition_probabilities(slow, space, starts, t);
            const auto simple_table = transition_probabilities(simple, space, starts, t);
            for (std::size_t s = 0; s < starts.size(); ++s)
                for (Site y = -20; y <= 20; ++y) {
                    const std::size_t iy = space.index_of(y);
                    const std::size_t iy2 = space.index_of(-y + 1);
                    const double lhs = slow_table.rows[s][iy] + slow_table.rows[s][iy2];
                    const double rhs = simple_table.rows[s][iy] + simple_table.rows[s][iy2];
                    const double diff = std::abs(lhs - rhs);
                    csv.row(static_cast<long long>(starts[s]), static_cast<long long>(y), t,
                            alpha, lhs, rhs, diff);
                    max_diff = std::max(max_diff, diff);
                }
        }
    }
    man.add_criterion(make_criterion("folding_max_abs_diff", max_diff, 1e-9, "<"));
    return man;
}

// ---------------------------------------------------------------------------
// lumping: the 1-D reflection fold and the 2-D quadrant fold

inline RunManifest run_lumping(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("lumping", ec.raw.hash());
    fs::create_directories(out);
    CsvWriter csv(out / "lumping.csv", {"fold", "t", "alpha", "discrepancy"});
    man.add_artifact(csv.path());

    double worst = 0.0;
    {
        const ModelParams p{8, ec.alpha, 0.0};
        const Slow1DWalk fine{p};
        const ReflectedHalflineWalk coarse;
        const Site H = 30;
        const auto fine_space = make_space_1d(fine, 1 - H, H);
        const auto coarse_space = make_space_1d(coarse, 1, H);
        const auto fold = [](Site x) { return std::max(x, 1 - x); };
        for (double t : {1.0, 2.0}) {
            const double d =
                lumping_check(fine, fine_space, fold, coarse, coarse_space, -4, t);
            csv.row("reflect-1d", t, ec.alpha, d);
            worst = std::max(worst, d);
        }
    }
    {
        const Simple2DRate2Walk fine;
        const QuadrantHalfWalk coarse;
        const Site R = 18;
        const auto fine_space = make_space_2d(fine, -R - 1, R, -R - 1, R);
        const auto coarse_space = make_space_2d(coarse, 0, R, 0, R);
        const auto fold = [](Site2 u) {
            return Site2{u.x >= 0 ? u.x : -u.x - 1, u.y >= 0 ? u.y : -u.y - 1};
        };
        for (double t : {1.0, 3.0}) {
            const double d = lumping_check(fine, fine_space, fold, coarse, coarse_space,
                                           Site2{-3, 2}, t);
            csv.row("quadrant-2d", t, 0.0, d);
            worst = std::max(worst, d);
        }
    }
    man.add_criterion(make_criterion("lumping_max_discrepancy", worst, 1e-9, "<"));
    return man;
}

// ---------------------------------------------------------------------------
// local-times: 2-D Monte Carlo bounds plus the deterministic occupation
// integrals

inline RunManifest run_local_times(const ExperimentConfig& ec, const fs::path& out,
                                   bool include_monte_carlo) {
    RunManifest man("local-times", ec.raw.hash());
    fs::create_directories(out);

    // occupation integrals (oracle-based, deterministic)
    {
        CsvWriter csv(out / "occupation.csv", {"walk", "n", "t", "value", "normalized"});
        man.add_artifact(csv.path());
        std::vector<double> rate2_norm;
        const Simple1DRate2Walk rate2;
        for (double t : {1.0, 4.0, 16.0, 64.0}) {
            const Site r = 20 + static_cast<Site>(6.0 * std::sqrt(2.0 * t)) + 10;
            const auto space = make_space_1d(rate2, -r, r + 1);
            const double v =
                occupation_integral(rate2, space, 0, [](Site x) { return x == 0; }, t);
            csv.row("simple1d-rate2", 1, t, v, v / std::sqrt(t));
            rate2_norm.push_back(v / std::sqrt(t));
        }
        man.add_criterion(make_criterion("occupation_rate2_sqrt_spread",
                                         ratio_spread(rate2_norm), 1.5, "<="));

        std::vector<double> slow_norm;
        for (int n : {8, 16, 32}) {
            const ModelParams p{n, ec.alpha, 0.0};
            const Slow1DWalk slow{p};
            const double horizon = 1.0 * n * n;  // macroscopic t = 1
            const Site r = 20 + static_cast<Site>(6.0 * std::sqrt(2.0 * horizon)) + 10;
            const auto space = make_space_1d(slow, -r, r + 1);
            const double v = occupation_integral(
                slow, space, 0, [](Site x) { return x == 0 || x == 1; }, horizon);
            // macroscopic form: n * int_0^t P[X_{s n^2} in {0,1}] ds = v * n / n^2
            const double macro = v / n;
            csv.row("slow1d", n, 1.0, v, macro);
            slow_norm.push_back(macro);
        }
        man.add_criterion(make_criterion("occupation_slowbond_n_spread",
                                         ratio_spread(slow_norm), 2.0, "<="));
    }

    if (include_monte_carlo) {
        CsvWriter diag(out / "localtime_diag.csv",
                       {"n", "t", "alpha", "start_x", "start_y", "estimate",
                        "ci_half_width", "normalized"});
        CsvWriter vert(out / "localtime_vertex.csv",
                       {"n", "t", "alpha", "start_x", "start_y", "estimate",
                        "ci_half_width", "normalized"});
        CsvWriter cross(out / "crossings.csv",
                        {"n", "t", "alpha", "estimate", "ci_half_width"});
        man.add_artifact(diag.path());
        man.add_artifact(vert.path());
        man.add_artifact(cross.path());

        std::vector<double> diag_norm, vert_norm, crossings;
        for (int n : ec.n_sweep) {
            const ModelParams p{n, ec.alpha, 0.0};
            const LocalTimeRow row =
                local_time_bounds_2d(p, ec.T, {0, 1}, ec.replicas, ec.seed + n);
            diag.row(row.n, row.t, row.alpha, static_cast<long long>(row.start.x),
                     static_cast<long long>(row.start.y), row.diag_mean, row.diag_ci,
                     row.diag_normalized);
            vert.row(row.n, row.t, row.alpha, static_cast<long long>(row.start.x),
                     static_cast<long long>(row.start.y), row.vertex_mean, row.vertex_ci,
                     row.vertex_normalized);
            cross.row(row.n, row.t, row.alpha, row.crossings_mean, row.crossings_ci);
            diag_norm.push_back(row.diag_normalized);
            vert_norm.push_back(row.vertex_normalized);
            crossings.push_back(row.crossings_mean);
        }
        if (diag_norm.size() >= 2) {
            man.add_criterion(make_criterion("localtime_diag_normalized_spread",
                                             ratio_spread(diag_norm), 3.0, "<="));
            man.add_criterion(make_criterion("localtime_vertex_normalized_spread",
                                             ratio_spread(vert_norm), 3.0, "<="));
            man.add_criterion(make_criterion("crossings_uniformly_bounded",
                                             ratio_spread(crossings), 4.0, "<="));
        }
    }
    return man;
}

// ---------------------------------------------------------------------------
// semigroup battery

inline RunManifest run_semigroup(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("semigroup", ec.raw.hash());
    fs::create_directories(out);
    const double alpha = ec.alpha;

    // closed form for the even Gaussian e^{-u^2}
    {
        TestFunctionSpec spec;
        spec.order = 3;
        spec.terms = {{TermSide::Both, {1.0}, 0.0, 1.0 / std::sqrt(2.0)}};
        const TestFunction g = make_test_function(spec, alpha);
        double worst = 0.0;
        CsvWriter csv(out / "gaussian_closed_form.csv", {"u", "value", "expected"});
        man.add_artifact(csv.path());
        for (double t : {0.05, 0.2}) {
            const RobinSemigroup sg(as_piecewise(g), t, alpha);
            for (double u = -4.0; u <= 4.0; u += 0.25) {
                const double expect =
                    std::exp(-u * u / (1.0 + 4.0 * t)) / std::sqrt(1.0 + 4.0 * t);
                const double v = sg.value(u);
                csv.row(u, v, expect);
                worst = std::max(worst, std::abs(v - expect));
            }
        }
        man.add_criterion(make_criterion("gaussian_closed_form_err", worst, 1e-6, "<"));
    }

    const TestFunction f = preset_test_function("jump", alpha);
    // function table artifact (u, value) for one probe time
    {
        CsvWriter csv(out / "semigroup_table.csv", {"u", "value"});
        man.add_artifact(csv.path());
        const RobinSemigroup sg(as_piecewise(f), 0.1, alpha);
        for (double u = -6.0; u <= 6.0; u += 0.05) csv.row(u, sg.value(u));
    }
    // Robin residual across probe times
    {
        double worst = 0.0;
        for (double t : {0.02, 0.1, 0.4})
            worst = std::max(worst,
                             std::abs(RobinSemigroup(as_piecewise(f), t, alpha).robin_residual()));
        man.add_criterion(make_criterion("robin_residual", worst, 1e-6, "<"));
    }
    // composition
    {
        const std::vector<double> probes{-2.0, -0.7, 0.0, 0.4, 1.3, 2.8};
        const double d = semigroup_property_check(f, 0.1, 0.1, probes);
        man.add_criterion(make_criterion("semigroup_composition", d, 1e-6, "<"));
    }
    // mass conservation
    {
        const double R = f.decay_radius(1e-14) + 14.0;
        const double m0 =
            integrate_pieces([&](double u) { return f.value(u); }, {-R, 0.0, R});
        const RobinSemigroup sg(as_piecewise(f), 0.2, alpha);
        const double m1 =
            integrate_pieces([&](double u) { return sg.value(u); }, {-R, 0.0, R});
        man.add_criterion(
            make_criterion("mass_conservation", std::abs(m1 - m0), 1e-6, "<"));
    }
    // variance report artifact (s, t, variance)
    {
        CsvWriter csv(out / "ou_variance.csv", {"s", "t", "variance"});
        man.add_artifact(csv.path());
        const MacroProfile macro(InitialProfile::constant(0.5), alpha);
        for (double s : {0.0, 0.05, 0.1})
            csv.row(s, ec.t_time, ou_variance(f, s, ec.t_time, macro));
    }
    return man;
}

// ---------------------------------------------------------------------------
// clt: initial-field central limit theorem

inline RunManifest run_clt(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("clt", ec.raw.hash());
    fs::create_directories(out);

    const int n = ec.n_sweep.back();
    const ModelParams p{n, ec.alpha, 0.0};
    const InitialProfile profile = ec.make_profile();
    const TestFunction f = preset_test_function(ec.test_functions.front(), ec.alpha);
    const Window1D w = Window1D::for_horizon(p, f.decay_radius(1e-14) + 1.0);

    const CltReport rep = initial_field_clt(profile, p, w, f, ec.replicas, ec.seed);
    CsvWriter csv(out / "clt_summary.csv",
                  {"n", "replicas", "sample_mean", "sample_variance", "predicted_variance",
                   "ad_statistic", "ad_critical"});
    man.add_artifact(csv.path());
    csv.row(n, ec.replicas, rep.sample_mean, rep.sample_variance, rep.predicted_variance,
            rep.normality.statistic, rep.normality.critical);

    const double rel =
        std::abs(rep.sample_variance - rep.predicted_variance) / rep.predicted_variance;
    man.add_criterion(make_criterion("clt_variance_relative_gap", rel, 0.05, "<="));
    man.add_criterion(make_criterion("clt_normality_ad_statistic", rep.normality.statistic,
                                     rep.normality.critical, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// qv: martingale mean, quadratic variation and the isometry (equilibrium)

struct QvRunArtifacts {
    EnsembleResult ensemble;
    std::vector<const TestFunction*> functions;
};

inline RunManifest run_qv(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("qv", ec.raw.hash());
    fs::create_directories(out);

    const int n = ec.n_sweep.back();
    const ModelParams p{n, ec.alpha, ec.t_time};
    const TestFunction f = preset_test_function(ec.test_functions.front(), ec.alpha);
    const Window1D w = Window1D::for_horizon(p, f.decay_radius(1e-12) + 0.5);
    const FunctionRows rows = FunctionRows::build(f, w, p);

    EnsembleSpec spec;
    spec.p = p;
    spec.window = w;
    const InitialProfile prof = InitialProfile::constant(0.5);
    spec.profile = &prof;
    spec.functions = {&rows};
    spec.snapshot_times = {ec.t_time};
    spec.t_end = ec.t_time;
    spec.replicas = ec.replicas;
    spec.seed = ec.seed;
    const EnsembleResult res = run_ensemble(spec);

    const MacroProfile macro(InitialProfile::constant(0.5), ec.alpha);
    const double predicted = qv_prediction(f, macro, ec.t_time);

    const std::vector<double>& M = res.martingale[0][0];
    const std::vector<double>& Q = res.qv[0][0];
    const MeanCi mom = mean_ci(M, 3.0);
    const QvReport qv = qv_convergence(Q, predicted);
    std::vector<double> iso(M.size());
    const double mbar = mom.mean;
    for (std::size_t r = 0; r < M.size(); ++r)
        iso[r] = M[r] * M[r] - Q[r] - 2.0 * mbar * M[r] + mbar * mbar;
    const MeanCi iso_ci = mean_ci(iso, 3.0);

    CsvWriter csv(out / "qv_summary.csv",
                  {"n", "replicas", "t", "mean_M", "mean_M_ci3", "var_M", "mean_qv",
                   "qv_predicted", "qv_rel_gap"});
    man.add_artifact(csv.path());
    const double varM = sample_variance(M, mom.mean);
    csv.row(n, ec.replicas, ec.t_time, mom.mean, mom.half_width, varM, qv.mean_qv,
            predicted, qv.relative_gap);

    man.add_criterion(
        make_criterion("martingale_mean_within_3sigma", std::abs(mom.mean), mom.half_width,
                       "<="));
    man.add_criterion(make_criterion("qv_relative_gap", qv.relative_gap, 0.10, "<="));
    man.add_criterion(make_criterion("isometry_varM_vs_meanQV", std::abs(iso_ci.mean),
                                     iso_ci.half_width, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// fluctuations: OU conditional law (equilibrium) + remainder scaling table

inline RunManifest run_fluctuations(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("fluctuations", ec.raw.hash());
    fs::create_directories(out);

    // deterministic remainder table first
    {
        CsvWriter csv(out / "remainder.csv", {"f", "n", "coefficient", "scaled_sqrt_n"});
        man.add_artifact(csv.path());
        for (const std::string& name : ec.test_functions) {
            std::vector<double> scaled;
            for (int n : ec.n_sweep) {
                const ModelParams p{n, ec.alpha, 0.0};
                const TestFunction f = preset_test_function(name, ec.alpha);
                const Window1D w = Window1D::for_horizon(p, f.decay_radius(1e-14) + 1.0);
                const double c = remainder_coefficient(f, p, w);
                csv.row(name, n, c, c * std::sqrt(n));
                scaled.push_back(c * std::sqrt(n));
            }
            if (scaled.size() >= 2)
                man.add_criterion(make_criterion("remainder_sqrtn_spread_" + name,
                                                 ratio_spread(scaled), 2.0, "<="));
        }
    }

    // conditional-law regression at equilibrium
    const int n = ec.n_sweep.back();
    const ModelParams p{n, ec.alpha, ec.t_time};
    const TestFunction f = preset_test_function(ec.test_functions.front(), ec.alpha);
    const Window1D w = Window1D::for_horizon(p, f.decay_radius(1e-12) + 0.5);
    const FunctionRows rows_f = FunctionRows::build(f, w, p);
    const FunctionRows rows_Tf =
        semigroup_function_rows(f, ec.t_time - ec.s_time, w, p);

    EnsembleSpec spec;
    spec.p = p;
    spec.window = w;
    const InitialProfile prof = InitialProfile::constant(0.5);
    spec.profile = &prof;
    spec.functions = {&rows_f, &rows_Tf};
    spec.snapshot_times = {ec.s_time, ec.t_time};
    spec.t_end = ec.t_time;
    spec.replicas = ec.replicas;
    spec.seed = ec.seed;
    const EnsembleResult res = run_ensemble(spec);

    const MacroProfile macro(InitialProfile::constant(0.5), ec.alpha);
    const double predicted = ou_variance(f, ec.s_time, ec.t_time, macro);
    const OuConditionalReport rep =
        ou_conditional_check(res.field[0][1], res.field[1][0], predicted);

    CsvWriter csv(out / "ou_conditional.csv",
                  {"n", "replicas", "s", "t", "slope", "slope_se", "residual_variance",
                   "predicted_variance", "rel_gap", "ad_statistic", "ad_critical"});
    man.add_artifact(csv.path());
    csv.row(n, ec.replicas, ec.s_time, ec.t_time, rep.regression.slope,
            rep.regression.slope_se, rep.residual_variance, rep.predicted_variance,
            rep.relative_gap, rep.residual_normality.statistic,
            rep.residual_normality.critical);

    man.add_criterion(make_criterion("ou_slope_minus_1_within_3se",
                                     std::abs(rep.regression.slope - 1.0),
                                     3.0 * rep.regression.slope_se, "<="));
    man.add_criterion(
        make_criterion("ou_residual_variance_rel_gap", rep.relative_gap, 0.15, "<="));
    man.add_criterion(make_criterion("ou_residual_normality_ad",
                                     rep.residual_normality.statistic,
                                     rep.residual_normality.critical, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// cross-module consistency (not a CLI kind; part of the full verification):
// empirical means and correlations against the deterministic solvers

inline RunManifest run_cross_consistency(const ExperimentConfig& ec, const fs::path& out) {
    RunManifest man("cross-consistency", ec.raw.hash());
    fs::create_directories(out);

    const int n = ec.n_sweep.back();
    const ModelParams p{n, ec.alpha, ec.T};
    const InitialProfile profile = ec.make_profile();

    // deterministic solvers
    const WindowV wv = WindowV::for_horizon(p, ec.interest);
    const Window1D w1 =
        Window1D::for_horizon(p, static_cast<double>(wv.L) / p.n + 0.5);
    const MeanPath path = evolve_mean_path(profile, p, w1, {.track_gradient = false});
    const CorrelationRun corr =
        evolve_correlation(CorrelationField::zero(wv), path, p, p.T, {.track_sup = false});

    // probes: 10 sites and 10 pairs straddling the bond
    std::vector<Site> sites;
    for (Site x : {-40, -15, -5, -1, 0, 1, 2, 6, 18, 50}) sites.push_back(x * n / 64);
    std::vector<std::pair<Site, Site>> pairs;
    for (Site k : {1, 2, 4, 7, 12}) {
        pairs.push_back({-k * n / 64, k * n / 64 + 1});  // across the bond
        pairs.push_back({k * n / 64, k * n / 64 + 3});   // same side
    }

    EnsembleSpec spec;
    spec.p = p;
    spec.window = w1;
    spec.profile = &profile;
    spec.rho_path = &path;
    spec.snapshot_times = {p.T};
    spec.t_end = p.T;
    spec.probe_sites = sites;
    spec.probe_pairs = pairs;
    spec.replicas = ec.replicas;
    spec.seed = ec.seed;
    const EnsembleResult res = run_ensemble(spec);

    CsvWriter mcsv(out / "mean_consistency.csv",
                   {"x", "empirical", "ci3", "solver", "within"});
    CsvWriter ccsv(out / "correlation_consistency.csv",
                   {"x", "y", "empirical", "ci3", "solver", "within"});
    man.add_artifact(mcsv.path());
    man.add_artifact(ccsv.path());

    // unified probe order inside the ensemble
    std::vector<Site> probes = sites;
    for (const auto& [a, b] : pairs) {
        probes.push_back(a);
        probes.push_back(b);
    }
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    const auto probe_index = [&probes](Site x) {
        return static_cast<std::size_t>(
            std::lower_bound(probes.begin(), probes.end(), x) - probes.begin());
    };

    std::size_t failures = 0;
    for (Site x : sites) {
        const EstimateCi est = empirical_mean(res, 0, probe_index(x));
        const double solver = path.value(p.T, x);
        const bool ok = std::abs(est.estimate - solver) <= est.ci_half_width;
        mcsv.row(static_cast<long long>(x), est.estimate, est.ci_half_width, solver,
                 ok ? 1 : 0);
        failures += ok ? 0 : 1;
    }
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto& [a, b] = pairs[q];
        const double ra = path.value(p.T, a);
        const double rb = path.value(p.T, b);
        const EstimateCi est = empirical_correlation(res, 0, q, ra, rb);
        const double solver = corr.field.at(a, b);
        const bool ok = std::abs(est.estimate - solver) <= est.ci_half_width;
        ccsv.row(static_cast<long long>(a), static_cast<long long>(b), est.estimate,
                 est.ci_half_width, solver, ok ? 1 : 0);
        failures += ok ? 0 : 1;
    }
    man.add_criterion(make_criterion("cross_consistency_probe_failures",
                                     static_cast<double>(failures), 0.0, "<="));
    return man;
}

// ---------------------------------------------------------------------------
// dispatch + verification tiers

inline RunManifest run_named_experiment(const ExperimentConfig& ec, const fs::path& out) {
    if (ec.kind == "mean-scaling") return run_mean_scaling(ec, out);
    if (ec.kind == "correlation-scaling") return run_correlation_scaling(ec, out);
    if (ec.kind == "lower-bound") return run_lower_bound(ec, out);
    if (ec.kind == "local-times") return run_local_times(ec, out, true);
    if (ec.kind == "folding") return run_folding(ec, out);
    if (ec.kind == "lumping") return run_lumping(ec, out);
    if (ec.kind == "semigroup") return run_semigroup(ec, out);
    if (ec.kind == "clt") return run_clt(ec, out);
    if (ec.kind == "qv") return run_qv(ec, out);
    if (ec.kind == "fluctuations") return run_fluctuations(ec, out);
    throw ConfigValidationError("field `experiment`: unknown kind '" + ec.kind + "'");
}

// Exit statuses of the CLI contract.
inline constexpr int kStatusOk = 0;
inline constexpr int kStatusCriterionFailure = 1;
inline constexpr int kStatusParseError = 2;
inline constexpr int kStatusValidationError = 3;

inline int run_experiment_file(const std::string& config_text, const fs::path& out_dir,
                               const std::map<std::string, std::string>& overrides,
                               std::ostream& log) {
    try {
        KeyValueConfig cfg = KeyValueConfig::parse_text(config_text);
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        const ExperimentConfig ec = validate_experiment_config(cfg);
        const RunManifest man = run_named_experiment(ec, out_dir);
        man.write(out_dir / "manifest.json");
        for (const auto& c : man.criteria())
            log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  value=" << c.value
                << " " << c.comparison << " " << c.threshold << "\n";
        return man.all_pass() ? kStatusOk : kStatusCriterionFailure;
    } catch (const ConfigParseError& e) {
        log << "parse error: " << e.what() << "\n";
        return kStatusParseError;
    } catch (const ConfigValidationError& e) {
        log << "validation error: " << e.what() << "\n";
        return kStatusValidationError;
    }
}

}  // namespace slowbond::experiments
