#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowbond/duhamel.hpp"
#include "slowbond/mean_solver.hpp"
#include "slowbond/profiles.hpp"

using namespace slowbond;

TEST_CASE("constant profiles are stationary", "[mean]") {
    const ModelParams p{16, 1.0, 0.1};
    const Window1D w = Window1D::for_horizon(p, 1.0);
    const MeanField rho0 = MeanField::from_profile(InitialProfile::constant(0.5), w, p.n);
    const MeanField rho = evolve_mean(rho0, p, 0.1);
    for (double v : rho.values) REQUIRE(v == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("mass is conserved and range preserved", "[mean]") {
    const ModelParams p{16, 0.5, 0.2};
    const Window1D w = Window1D::for_horizon(p, 1.0);
    const MeanField rho0 = MeanField::from_profile(InitialProfile::tanh_ramp(), w, p.n);
    const MeanField rho = evolve_mean(rho0, p, 0.2);
    REQUIRE(rho.mass() == Catch::Approx(rho0.mass()).margin(1e-8));
    for (double v : rho.values) {
        REQUIRE(v >= -1e-9);
        REQUIRE(v <= 1.0 + 1e-9);
    }
}

TEST_CASE("step halving confirms 1e-8 accuracy", "[mean]") {
    const ModelParams p{16, 1.0, 0.1};
    const Window1D w = Window1D::for_horizon(p, 1.0);
    const MeanField rho0 = MeanField::from_profile(InitialProfile::tanh_ramp(), w, p.n);
    const MeanField coarse = evolve_mean(rho0, p, 0.1, {.dt_factor = 0.25});
    const MeanField fine = evolve_mean(rho0, p, 0.1, {.dt_factor = 0.125});
    double sup = 0.0;
    for (std::size_t i = 0; i < coarse.values.size(); ++i)
        sup = std::max(sup, std::abs(coarse.values[i] - fine.values[i]));
    REQUIRE(sup < 1e-8);
}

TEST_CASE("step initial data keeps a density gap across the slow bond", "[mean]") {
    const ModelParams p{64, 0.1, 0.05};
    const Window1D w = Window1D::for_horizon(p, 0.5);
    const MeanField rho0 = MeanField::from_profile(InitialProfile::step(0.5, 0.25), w, p.n);
    const MeanField rho = evolve_mean(rho0, p, 0.05);
    REQUIRE(rho.at(0) - rho.at(1) >= 0.05);
}

TEST_CASE("gradient sup excludes the slow bond and tracks its location", "[mean]") {
    SECTION("constant profile gives zero") {
        const ModelParams p{16, 1.0, 0.05};
        const Window1D w = Window1D::for_horizon(p, 1.0);
        const MeanPath path = evolve_mean_path(InitialProfile::constant(0.3), p, w);
        REQUIRE(path.tracked_gradient_sup().value == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("tanh profile: n-uniform bound, diagnostic bond gap at most 1") {
        std::vector<double> sups;
        for (int n : {16, 32}) {
            const ModelParams p{n, 1.0, 0.1};
            const Window1D w = Window1D::for_horizon(p, 3.0);
            const MeanPath path = evolve_mean_path(InitialProfile::tanh_ramp(), p, w);
            const GradientSup g = path.tracked_gradient_sup();
            REQUIRE(g.diag_at_bond0 <= 1.0);
            REQUIRE(g.value > 0.0);
            sups.push_back(g.value);
        }
        REQUIRE(ratio_spread(sups) <= 2.0);
    }
    SECTION("snapshot-grid sup agrees with the per-step tracker") {
        const ModelParams p{16, 1.0, 0.1};
        const Window1D w = Window1D::for_horizon(p, 2.0);
        const MeanPath path = evolve_mean_path(InitialProfile::tanh_ramp(), p, w);
        const GradientSup a = path.tracked_gradient_sup();
        const GradientSup b = discrete_gradient_sup(path);
        REQUIRE(b.value <= a.value + 1e-12);
        REQUIRE(a.value == Catch::Approx(b.value).epsilon(1e-3));
    }
}

TEST_CASE("gradient-square tables scale as the Duhamel bounds require", "[mean]") {
    // S_n = sup (grad)^2 bounded in n; S_{n,0} = sup (n [rho(1)-rho(0)])^2 <= C n^2
    std::vector<double> sn, sn0_over_n2;
    for (int n : {16, 32, 64}) {
        const ModelParams p{n, 1.0, 0.1};
        const Window1D w = Window1D::for_horizon(p, 3.0);
        const MeanPath path = evolve_mean_path(InitialProfile::tanh_ramp(), p, w);
        const GradientSup g = path.tracked_gradient_sup();
        sn.push_back(g.value * g.value);
        const double grad0 = static_cast<double>(n) * g.diag_at_bond0;
        sn0_over_n2.push_back(grad0 * grad0 / (static_cast<double>(n) * n));
    }
    REQUIRE(ratio_spread(sn) <= 2.0);
    REQUIRE(ratio_spread(sn0_over_n2) <= 2.0);
}

TEST_CASE("mean path interpolation reproduces snapshot values", "[mean]") {
    const ModelParams p{16, 1.0, 0.1};
    const Window1D w = Window1D::for_horizon(p, 1.0);
    const MeanPath path = evolve_mean_path(InitialProfile::tanh_ramp(), p, w);
    REQUIRE(path.value(path.snapshot_time(5), 3) ==
            Catch::Approx(path.snapshot(5)[w.index(3)]).margin(1e-12));
    // interpolated values stay within the occupancy range
    const double v = path.value(0.5 * (path.snapshot_time(4) + path.snapshot_time(5)), 0);
    REQUIRE(v >= -1e-9);
    REQUIRE(v <= 1.0 + 1e-9);
}

TEST_CASE("Duhamel walk representation matches direct integration", "[mean][duhamel]") {
    const ModelParams p{16, 1.0, 0.1};
    const Window1D w(-99, 100);

    SECTION("constant profile: both equal the constant") {
        const MeanField rho0 = MeanField::from_profile(InitialProfile::constant(0.42), w, p.n);
        const DuhamelCheck c = duhamel_mean_check(rho0, p, 0.05, 0);
        REQUIRE(c.solver_value == Catch::Approx(0.42).margin(1e-10));
        REQUIRE(c.walk_value == Catch::Approx(0.42).margin(1e-10));
    }
    SECTION("t = 0 returns the initial datum") {
        const MeanField rho0 = MeanField::from_profile(InitialProfile::tanh_ramp(), w, p.n);
        const DuhamelCheck c = duhamel_mean_check(rho0, p, 0.0, 5);
        REQUIRE(c.diff < 1e-14);
        REQUIRE(c.solver_value == Catch::Approx(rho0.at(5)));
    }
    SECTION("tanh profile at the slow bond") {
        const MeanField rho0 = MeanField::from_profile(InitialProfile::tanh_ramp(), w, p.n);
        const DuhamelCheck c = duhamel_mean_check(rho0, p, 0.1, 0);
        REQUIRE(c.diff < 1e-6);
    }
    SECTION("oversized windows are rejected") {
        const Window1D big(-120, 121);
        const MeanField rho0 = MeanField::from_profile(InitialProfile::tanh_ramp(), big, p.n);
        REQUIRE_THROWS_AS(duhamel_mean_check(rho0, p, 0.1, 0), std::invalid_argument);
    }
}
