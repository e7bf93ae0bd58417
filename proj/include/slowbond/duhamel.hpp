#pragma once

// Walk representation of the discrete mean:  because A_n is symmetric,
//     rho_t(x) = sum_z P_x[X_{t n^2} = z] rho_0(z)
// on a reflecting window, which gives an oracle for the RK4 solver built
// from entirely different numerics (uniformization).

#include <stdexcept>
#include <utility>

#include "slowbond/mean_solver.hpp"
#include "slowbond/walk_oracle.hpp"
#include "slowbond/walks.hpp"

namespace slowbond {

struct DuhamelCheck {
    double solver_value = 0.0;
    double walk_value = 0.0;
    double diff = 0.0;
};

inline DuhamelCheck duhamel_mean_check(const MeanField& rho0, const ModelParams& p, double t,
                                       Site x) {
    if (rho0.window.size() > 201)
        throw std::invalid_argument("duhamel_mean_check: window too large (> 201 sites)");
    if (!rho0.window.contains(x))
        throw std::invalid_argument("duhamel_mean_check: probe site outside window");

    DuhamelCheck out;
    out.solver_value = evolve_mean(rho0, p, t).at(x);

    const Slow1DWalk walk{p};
    const auto space = make_space_1d(walk, rho0.window.lo, rho0.window.hi);
    const auto row =
        transition_probabilities(walk, space, {x}, t * p.n * p.n).rows[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        acc += row[i] * rho0.at(space.state(i));
    out.walk_value = acc;
    out.diff = std::abs(out.solver_value - out.walk_value);
    return out;
}

}  // namespace slowbond
