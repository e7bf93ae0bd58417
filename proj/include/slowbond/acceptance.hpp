#pragma once

// The acceptance battery: every quantitative claim the laboratory checks,
// with all parameters and tolerances pinned here.  `fast` covers the
// deterministic/oracle criteria; `full` adds the Monte-Carlo ones.
//
//   A1  discrete-derivative scaling         (deterministic)
//   A2  correlation scaling                 (deterministic)
//   A3  lower-bound mechanism               (deterministic)
//   A4  2-D local times                     (Monte Carlo)
//   A5  heat-kernel folding identity        (oracle, exact)
//   A6  lumping projections                 (oracle, exact)
//   A7  occupation integrals                (oracle)
//   A8  initial-field CLT                   (Monte Carlo)
//   A9  martingale and quadratic variation  (Monte Carlo)
//   A10 OU conditional law                  (Monte Carlo)
//   A11 Robin semigroup correctness         (deterministic)
//   A12 remainder scaling                   (deterministic)
//   A13 cross-module consistency            (Monte Carlo)

#include <chrono>
#include <iomanip>
#include <iostream>

#include "slowbond/experiments.hpp"

namespace slowbond::acceptance {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kSeed = 20240601ull;

struct CriterionReport {
    std::string id;
    std::string title;
    bool pass = true;
    double seconds = 0.0;
    std::vector<CriterionOutcome> details;
};

namespace detail {

inline ExperimentConfig base_config(const std::string& kind) {
    KeyValueConfig raw;
    raw.set("experiment", kind);
    ExperimentConfig ec = validate_experiment_config(raw);
    ec.seed = kSeed;
    return ec;
}

inline CriterionReport from_manifest(const std::string& id, const std::string& title,
                                     const RunManifest& man,
                                     const std::string& name_prefix = "") {
    CriterionReport rep;
    rep.id = id;
    rep.title = title;
    for (const auto& c : man.criteria()) {
        if (!name_prefix.empty() && c.name.rfind(name_prefix, 0) != 0) continue;
        rep.details.push_back(c);
        rep.pass = rep.pass && c.pass;
    }
    return rep;
}

// A9 + A10 share one equilibrium ensemble at n = 128.
inline std::pair<CriterionReport, CriterionReport> qv_and_ou(const fs::path& out) {
    ExperimentConfig ec = base_config("qv");
    ec.n_sweep = {128};
    ec.replicas = 2000;  // >= the 10^3 design point; shared by both criteria
    ec.s_time = 0.1;
    ec.t_time = 0.2;
    ec.test_functions = {"jump"};
    fs::create_directories(out);
    RunManifest man("qv+ou", ec.raw.hash());

    const ModelParams p{128, ec.alpha, ec.t_time};
    const TestFunction f = preset_test_function("jump", ec.alpha);
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

    CriterionReport a9;
    a9.id = "A9";
    a9.title = "martingale mean, QV prediction, isometry (n=128)";
    {
        const std::vector<double>& M = res.martingale[1][0];
        const std::vector<double>& Q = res.qv[1][0];
        const MeanCi mom = mean_ci(M, 3.0);
        a9.details.push_back(experiments::make_criterion(
            "martingale_mean_within_3sigma", std::abs(mom.mean), mom.half_width, "<="));
        const double predicted = qv_prediction(f, macro, ec.t_time);
        const QvReport qv = qv_convergence(Q, predicted);
        a9.details.push_back(
            experiments::make_criterion("qv_relative_gap", qv.relative_gap, 0.10, "<="));
        std::vector<double> iso(M.size());
        for (std::size_t r = 0; r < M.size(); ++r)
            iso[r] = (M[r] - mom.mean) * (M[r] - mom.mean) - Q[r];
        const MeanCi iso_ci = mean_ci(iso, 3.0);
        a9.details.push_back(experiments::make_criterion(
            "isometry_varM_vs_meanQV", std::abs(iso_ci.mean), iso_ci.half_width, "<="));
        CsvWriter csv(out / "qv_summary.csv",
                      {"n", "replicas", "t", "mean_M", "mean_M_ci3", "var_M", "mean_qv",
                       "qv_predicted"});
        csv.row(128, ec.replicas, ec.t_time, mom.mean, mom.half_width,
                sample_variance(M, mom.mean), qv.mean_qv, predicted);
        man.add_artifact(csv.path());
    }
    for (const auto& c : a9.details) a9.pass = a9.pass && c.pass;

    CriterionReport a10;
    a10.id = "A10";
    a10.title = "OU conditional law: slope and residual variance (n=128)";
    {
        const double predicted = ou_variance(f, ec.s_time, ec.t_time, macro);
        const OuConditionalReport rep =
            ou_conditional_check(res.field[0][1], res.field[1][0], predicted);
        a10.details.push_back(experiments::make_criterion(
            "ou_slope_minus_1_within_3se", std::abs(rep.regression.slope - 1.0),
            3.0 * rep.regression.slope_se, "<="));
        a10.details.push_back(experiments::make_criterion(
            "ou_residual_variance_rel_gap", rep.relative_gap, 0.15, "<="));
        a10.details.push_back(experiments::make_criterion(
            "ou_residual_normality_ad", rep.residual_normality.statistic,
            rep.residual_normality.critical, "<="));
        CsvWriter csv(out / "ou_conditional.csv",
                      {"n", "replicas", "s", "t", "slope", "slope_se",
                       "residual_variance", "predicted_variance"});
        csv.row(128, ec.replicas, ec.s_time, ec.t_time, rep.regression.slope,
                rep.regression.slope_se, rep.residual_variance, rep.predicted_variance);
        man.add_artifact(csv.path());
    }
    for (const auto& c : a10.details) a10.pass = a10.pass && c.pass;

    man.write(out / "manifest.json");
    return {a9, a10};
}

}  // namespace detail

struct Options {
    bool full = true;
    fs::path out_dir = "acceptance-out";
    std::uint64_t seed = kSeed;
};

inline std::vector<CriterionReport> run(const Options& opt, std::ostream& log) {
    using clock = std::chrono::steady_clock;
    std::vector<CriterionReport> reports;

    const auto push = [&](CriterionReport rep, clock::time_point t0) {
        rep.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        log << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.id << "  " << rep.title << "  ("
            << std::fixed << std::setprecision(1) << rep.seconds << " s)\n";
        for (const auto& c : rep.details)
            log << "        " << (c.pass ? "ok   " : "FAIL ") << c.name
                << "  value=" << std::setprecision(6) << std::scientific << c.value << " "
                << c.comparison << " " << c.threshold << "\n"
                << std::defaultfloat;
        reports.push_back(std::move(rep));
    };

    {  // A1
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("mean-scaling");
        ec.alpha = 1.0;
        ec.T = 0.5;
        ec.n_sweep = {32, 64, 128};
        ec.interest = 4.0;
        const RunManifest man = experiments::run_mean_scaling(ec, opt.out_dir / "a1");
        man.write(opt.out_dir / "a1" / "manifest.json");
        push(detail::from_manifest("A1", "discrete-derivative scaling (tanh, T=0.5)", man),
             t0);
    }
    {  // A2
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("correlation-scaling");
        ec.alpha = 1.0;
        ec.T = 0.25;
        ec.n_sweep = {32, 64, 128};
        ec.interest = 3.0;
        const RunManifest man =
            experiments::run_correlation_scaling(ec, opt.out_dir / "a2");
        man.write(opt.out_dir / "a2" / "manifest.json");
        push(detail::from_manifest("A2", "correlation scaling (tanh, T=0.25)", man), t0);
    }
    {  // A3
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("lower-bound");
        ec.alpha = 0.1;
        ec.T = 0.1;
        ec.n_sweep = {128};
        ec.profile_spec = "step:0.5:0.25";
        ec.interest = 3.0;
        const RunManifest man = experiments::run_lower_bound(ec, opt.out_dir / "a3");
        man.write(opt.out_dir / "a3" / "manifest.json");
        push(detail::from_manifest("A3", "lower-bound mechanism (step, alpha=0.1)", man),
             t0);
    }
    {  // A5
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("folding");
        const RunManifest man = experiments::run_folding(ec, opt.out_dir / "a5");
        man.write(opt.out_dir / "a5" / "manifest.json");
        push(detail::from_manifest("A5", "heat-kernel folding identity (n=8)", man), t0);
    }
    {  // A6
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("lumping");
        const RunManifest man = experiments::run_lumping(ec, opt.out_dir / "a6");
        man.write(opt.out_dir / "a6" / "manifest.json");
        push(detail::from_manifest("A6", "lumping projections", man), t0);
    }
    {  // A7 (occupation only; MC local times are A4)
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("local-times");
        const RunManifest man =
            experiments::run_local_times(ec, opt.out_dir / "a7", false);
        man.write(opt.out_dir / "a7" / "manifest.json");
        push(detail::from_manifest("A7", "occupation integrals", man, "occupation"), t0);
    }
    {  // A11
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("semigroup");
        const RunManifest man = experiments::run_semigroup(ec, opt.out_dir / "a11");
        man.write(opt.out_dir / "a11" / "manifest.json");
        push(detail::from_manifest("A11", "Robin semigroup correctness", man), t0);
    }
    {  // A12
        auto t0 = clock::now();
        ExperimentConfig ec = detail::base_config("fluctuations");
        ec.n_sweep = {32, 64, 128};
        ec.test_functions = {"jump", "jump2", "smooth"};
        // remainder table only: reuse the runner's deterministic part
        RunManifest man("remainder", ec.raw.hash());
        fs::create_directories(opt.out_dir / "a12");
        CsvWriter csv(opt.out_dir / "a12" / "remainder.csv",
                      {"f", "n", "coefficient", "scaled_sqrt_n"});
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
            man.add_criterion(experiments::make_criterion(
                "remainder_sqrtn_spread_" + name, ratio_spread(scaled), 2.0, "<="));
        }
        man.write(opt.out_dir / "a12" / "manifest.json");
        push(detail::from_manifest("A12", "remainder scaling (3 test functions)", man), t0);
    }

    if (opt.full) {
        {  // A4
            auto t0 = clock::now();
            ExperimentConfig ec = detail::base_config("local-times");
            ec.alpha = 1.0;
            ec.T = 1.0;
            ec.n_sweep = {8, 16, 32};
            ec.replicas = 10000;
            const RunManifest man =
                experiments::run_local_times(ec, opt.out_dir / "a4", true);
            man.write(opt.out_dir / "a4" / "manifest.json");
            push(detail::from_manifest("A4", "2-D local times (MC, 1e4 replicas)", man,
                                       "localtime"),
                 t0);
        }
        {  // A8
            auto t0 = clock::now();
            ExperimentConfig ec = detail::base_config("clt");
            ec.n_sweep = {500};
            ec.replicas = 10000;
            ec.test_functions = {"smooth"};
            const RunManifest man = experiments::run_clt(ec, opt.out_dir / "a8");
            man.write(opt.out_dir / "a8" / "manifest.json");
            push(detail::from_manifest("A8", "initial-field CLT (n=500, 1e4 replicas)",
                                       man),
                 t0);
        }
        {  // A9 + A10
            auto t0 = clock::now();
            auto [a9, a10] = detail::qv_and_ou(opt.out_dir / "a9a10");
            const double secs =
                std::chrono::duration<double>(clock::now() - t0).count();
            a9.seconds = secs;
            a10.seconds = 0.0;
            log << (a9.pass ? "[PASS] " : "[FAIL] ") << a9.id << "  " << a9.title << "  ("
                << std::fixed << std::setprecision(1) << secs << " s)\n";
            for (const auto& c : a9.details)
                log << "        " << (c.pass ? "ok   " : "FAIL ") << c.name
                    << "  value=" << std::setprecision(6) << std::scientific << c.value
                    << " " << c.comparison << " " << c.threshold << "\n"
                    << std::defaultfloat;
            reports.push_back(a9);
            log << (a10.pass ? "[PASS] " : "[FAIL] ") << a10.id << "  " << a10.title
                << "  (shared run)\n";
            for (const auto& c : a10.details)
                log << "        " << (c.pass ? "ok   " : "FAIL ") << c.name
                    << "  value=" << std::setprecision(6) << std::scientific << c.value
                    << " " << c.comparison << " " << c.threshold << "\n"
                    << std::defaultfloat;
            reports.push_back(a10);
        }
        {  // A13
            auto t0 = clock::now();
            ExperimentConfig ec = detail::base_config("qv");
            ec.kind = "cross-consistency";
            ec.alpha = 1.0;
            ec.T = 0.25;
            ec.n_sweep = {64};
            ec.replicas = 10000;
            ec.interest = 3.0;
            const RunManifest man =
                experiments::run_cross_consistency(ec, opt.out_dir / "a13");
            man.write(opt.out_dir / "a13" / "manifest.json");
            push(detail::from_manifest(
                     "A13", "cross-module consistency (n=64, 1e4 replicas)", man),
                 t0);
        }
    }
    return reports;
}

}  // namespace slowbond::acceptance
