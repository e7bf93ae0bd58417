#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowbond/fluctuations.hpp"

using namespace slowbond;

TEST_CASE("initial field CLT", "[fluct][mc]") {
    SECTION("packed profile gives identically zero samples") {
        const ModelParams p{64, 1.0, 0.0};
        const Window1D w = Window1D::for_horizon(p, 14.0);
        const TestFunction f = preset_test_function("smooth", p.alpha);
        const CltReport rep =
            initial_field_clt(InitialProfile::constant(1.0), p, w, f, 200, 5);
        REQUIRE(rep.sample_variance == 0.0);
        REQUIRE(rep.predicted_variance == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("tanh profile: variance matches the chi integral, Gaussian shape") {
        const ModelParams p{200, 1.0, 0.0};
        const Window1D w = Window1D::for_horizon(p, 14.0);
        const TestFunction f = preset_test_function("smooth", p.alpha);
        const CltReport rep =
            initial_field_clt(InitialProfile::tanh_ramp(), p, w, f, 4000, 21);
        REQUIRE(std::abs(rep.sample_mean) <= rep.mean_ci);
        REQUIRE(rep.sample_variance ==
                Catch::Approx(rep.predicted_variance).epsilon(0.05));
        REQUIRE_FALSE(rep.normality.rejected);
    }
    SECTION("polarization and covariance against the chi integral") {
        const ModelParams p{100, 1.0, 0.0};
        const Window1D w = Window1D::for_horizon(p, 14.0);
        const TestFunction f = preset_test_function("smooth", p.alpha);
        const TestFunction g = preset_test_function("jump", p.alpha);
        const InitialProfile prof = InitialProfile::tanh_ramp();
        const std::size_t R = 4000;
        std::vector<double> yf(R), yg(R);
        const double sq = std::sqrt(static_cast<double>(p.n));
        for (std::size_t r = 0; r < R; ++r) {
            Rng rng(derive_seed(77, r));
            double af = 0.0, ag = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double u = static_cast<double>(w.site(i)) / p.n;
                const double rho = prof(u);
                const double eta = rng.uniform() < rho ? 1.0 : 0.0;
                af += f.value(u) * (eta - rho);
                ag += g.value(u) * (eta - rho);
            }
            yf[r] = af / sq;
            yg[r] = ag / sq;
        }
        // algebraic polarization on the very same samples
        std::vector<double> plus(R), minus(R);
        for (std::size_t r = 0; r < R; ++r) {
            plus[r] = yf[r] + yg[r];
            minus[r] = yf[r] - yg[r];
        }
        const double vp = sample_variance(plus, pairwise_mean(plus));
        const double vm = sample_variance(minus, pairwise_mean(minus));
        const double cov = sample_covariance(yf, yg);
        REQUIRE(vp - vm == Catch::Approx(4.0 * cov).margin(1e-10));
        // and the covariance matches int chi rho0 f g within MC error
        const double predicted = initial_field_covariance(f, g, prof);
        const double se = std::sqrt((sample_variance(yf, pairwise_mean(yf)) *
                                     sample_variance(yg, pairwise_mean(yg)) +
                                     cov * cov) /
                                    static_cast<double>(R));
        REQUIRE(std::abs(cov - predicted) <= 3.5 * se);
    }
}

TEST_CASE("remainder coefficient scalings", "[fluct]") {
    SECTION("sqrt(n)-normalized coefficient is bounded across n") {
        for (const char* name : {"jump", "jump2"}) {
            std::vector<double> scaled;
            for (int n : {32, 64, 128}) {
                const ModelParams p{n, 1.0, 0.0};
                const Window1D w = Window1D::for_horizon(p, 14.0);
                const TestFunction f = preset_test_function(name, p.alpha);
                scaled.push_back(remainder_coefficient(f, p, w) * std::sqrt(n));
            }
            REQUIRE(ratio_spread(scaled) <= 2.0);
        }
    }
    SECTION("far-supported functions see pure discretization error") {
        std::vector<double> scaled;
        for (int n : {32, 64, 128}) {
            const ModelParams p{n, 1.0, 0.0};
            const Window1D w = Window1D::for_horizon(p, 14.0);
            const TestFunction f = preset_test_function("far", p.alpha);
            scaled.push_back(remainder_coefficient(f, p, w) * std::pow(n, 1.5));
        }
        REQUIRE(ratio_spread(scaled) <= 2.0);
    }
    SECTION("adding mass far outside the window changes nothing") {
        const ModelParams p{64, 1.0, 0.0};
        const Window1D w = Window1D::for_horizon(p, 14.0);
        TestFunctionSpec base;
        base.jump = 0.5;
        base.order = 5;
        base.terms = {{TermSide::Both, {0.8}, 0.0, 1.2}};
        const TestFunction f1 = make_test_function(base, 1.0);
        base.terms.push_back({TermSide::Both, {2.0}, 60.0, 0.5});  // far beyond the window
        const TestFunction f2 = make_test_function(base, 1.0);
        REQUIRE(std::abs(remainder_coefficient(f1, p, w) -
                         remainder_coefficient(f2, p, w)) < 1e-10);
    }
}

TEST_CASE("QV and OU conditional law at equilibrium (small n smoke)", "[fluct][mc]") {
    const ModelParams p{32, 1.0, 0.1};
    const Window1D w = Window1D::for_horizon(p, 10.0);
    const TestFunction f = preset_test_function("jump", p.alpha);
    const FunctionRows rows_f = FunctionRows::build(f, w, p);
    const double s_time = 0.05, t_time = 0.1;
    const FunctionRows rows_Tf = semigroup_function_rows(f, t_time - s_time, w, p);

    EnsembleSpec spec;
    spec.p = p;
    spec.window = w;
    const InitialProfile prof = InitialProfile::constant(0.5);
    spec.profile = &prof;
    spec.functions = {&rows_f, &rows_Tf};
    spec.snapshot_times = {s_time, t_time};
    spec.t_end = t_time;
    spec.replicas = 1200;
    spec.seed = 31337;
    const EnsembleResult res = run_ensemble(spec);

    const MacroProfile macro(InitialProfile::constant(0.5), p.alpha);
    SECTION("mean QV against the macroscopic prediction") {
        const double predicted = qv_prediction(f, macro, t_time);
        const QvReport rep = qv_convergence(res.qv[1][0], predicted);
        REQUIRE(rep.relative_gap < 0.25);  // n = 32 smoke; acceptance runs n = 128
        REQUIRE(rep.mean_qv > 0.0);
    }
    SECTION("regression of Y_t(f) on Y_s(T_{t-s} f)") {
        const double predicted = ou_variance(f, s_time, t_time, macro);
        const OuConditionalReport rep =
            ou_conditional_check(res.field[0][1], res.field[1][0], predicted);
        REQUIRE(std::abs(rep.regression.slope - 1.0) <= 4.0 * rep.regression.slope_se);
        REQUIRE(rep.relative_gap < 0.4);
        REQUIRE(rep.predicted_variance > 0.0);
    }
}
