#pragma once

// Initial density profiles.  A profile is a bounded measurable function
// R -> [0,1]; lattices sample it at x/n.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace slowbond {

class InitialProfile {
  public:
    enum class Kind { Smooth, Step };

    static InitialProfile constant(double c) {
        check_range(c);
        return InitialProfile(Kind::Smooth, [c](double) { return c; }, "constant");
    }

    // 1/2 + 1/4 tanh(u): the smooth reference profile used by the scaling
    // experiments.
    static InitialProfile tanh_ramp() {
        return InitialProfile(
            Kind::Smooth, [](double u) { return 0.5 + 0.25 * std::tanh(u); }, "tanh");
    }

    static InitialProfile smooth(std::function<double(double)> f, std::string name = "smooth") {
        return InitialProfile(Kind::Smooth, std::move(f), std::move(name));
    }

    // left value on u <= 0, right value on u > 0 (the §-step convention:
    // site x <= 0 samples the left value).
    static InitialProfile step(double left, double right) {
        check_range(left);
        check_range(right);
        return InitialProfile(
            Kind::Step, [left, right](double u) { return u <= 0.0 ? left : right; }, "step");
    }

    double operator()(double u) const { return f_(u); }
    double at_site(long long x, int n) const {
        return f_(static_cast<double>(x) / static_cast<double>(n));
    }
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }

  private:
    InitialProfile(Kind k, std::function<double(double)> f, std::string name)
        : kind_(k), f_(std::move(f)), name_(std::move(name)) {}

    static void check_range(double v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("InitialProfile: density values must lie in [0,1]");
    }

    Kind kind_;
    std::function<double(double)> f_;
    std::string name_;
};

}  // namespace slowbond
