#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slowbond/integrators.hpp"
#include "slowbond/util.hpp"

using namespace slowbond;

namespace {

// y' = lambda (y - sin t) + cos t has exact solution sin t from y(0) = 0.
RhsFn stiff_scalar(double lambda) {
    return [lambda](double t, const Field& y, Field& out) {
        out[0] = lambda * (y[0] - std::sin(t)) + std::cos(t);
    };
}

double rk4_error(double lambda, double dt) {
    Field y{0.0};
    const double t_end = 1.0;
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    rk4_integrate(stiff_scalar(lambda), y, 0.0, dt, steps, std::abs(lambda));
    return std::abs(y[0] - std::sin(t_end));
}

double rkc_error(double lambda, std::size_t steps) {
    Field y{0.0};
    rkc2_integrate(stiff_scalar(lambda), y, 0.0, 1.0, steps, std::abs(lambda));
    return std::abs(y[0] - std::sin(1.0));
}

// small random symmetric dissipative system with a time-dependent source
struct RandomSystem {
    std::vector<std::vector<double>> a;
    explicit RandomSystem(std::size_t m) : a(m, std::vector<double>(m, 0.0)) {
        Rng rng(7);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) a[i][j] = a[j][i] = rng.uniform();
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) s += a[i][j];
            a[i][i] = -s;  // generator-like: row sums zero
        }
    }
    void operator()(double t, const Field& y, Field& out) const {
        for (std::size_t i = 0; i < a.size(); ++i) {
            double s = std::sin(t + static_cast<double>(i));
            for (std::size_t j = 0; j < a.size(); ++j) s += a[i][j] * y[j];
            out[i] = s;
        }
    }
};

}  // namespace

TEST_CASE("RK4 converges at fourth order", "[integrators]") {
    const double e1 = rk4_error(-4.0, 0.02);
    const double e2 = rk4_error(-4.0, 0.01);
    const double order = std::log2(e1 / e2);
    REQUIRE(order > 3.7);
    REQUIRE(order < 4.3);
}

TEST_CASE("RK4 rejects unstable step sizes", "[integrators]") {
    Field y{1.0};
    REQUIRE_THROWS_AS(
        rk4_integrate(stiff_scalar(-100.0), y, 0.0, 0.05, 20, 100.0),
        std::invalid_argument);
}

TEST_CASE("RKC converges at second order", "[integrators]") {
    const double e1 = rkc_error(-4.0, 40);
    const double e2 = rkc_error(-4.0, 80);
    const double order = std::log2(e1 / e2);
    REQUIRE(order > 1.7);
    REQUIRE(order < 2.4);
}

TEST_CASE("RKC stability boundary grows ~ 0.65 s^2", "[integrators]") {
    for (int s : {3, 5, 10, 20, 50}) {
        const auto co = rkc::coefficients(s);
        REQUIRE(co.beta > 0.63 * (s * s - 1));
        REQUIRE(co.beta < 0.70 * (s * s - 1));
        REQUIRE(co.c[s] == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("RKC handles stiffness far beyond the RK4 interval", "[integrators]") {
    // one macro-step with dt*rho = 2000 must stay bounded and accurate
    Field y{0.0};
    rkc2_integrate(stiff_scalar(-2000.0), y, 0.0, 1.0, 32, 2000.0);
    REQUIRE(std::abs(y[0] - std::sin(1.0)) < 1e-4);
}

TEST_CASE("RKC matches RK4 on a sourced linear system", "[integrators]") {
    const RandomSystem sys(24);
    double rho = 0.0;
    for (const auto& row : sys.a) {
        double s = 0.0;
        for (double v : row) s += std::abs(v);
        rho = std::max(rho, s);
    }
    Field y1(24, 0.0), y2(24, 0.0);
    const RhsFn rhs = [&sys](double t, const Field& y, Field& out) { sys(t, y, out); };
    rk4_integrate(rhs, y1, 0.0, 1e-3, 1000, rho);
    rkc2_integrate(rhs, y2, 0.0, 1.0, 250, rho);
    for (std::size_t i = 0; i < y1.size(); ++i)
        REQUIRE(y1[i] == Catch::Approx(y2[i]).margin(1e-7));
}
