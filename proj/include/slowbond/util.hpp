#pragma once

// Small shared utilities: deterministic RNG streams, compensated and
// pairwise summation, index helpers.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slowbond {

// SplitMix64 step. Used both as a stand-alone generator and as the
// counter-based seed-splitting function for replica streams: replica i of a
// run with base seed s draws from Rng(derive_seed(s, i)). This keeps replica
// streams independent of scheduling and worker count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    s += counter * 0x9E3779B97F4A7C15ull;
    return splitmix64(s);
}

// xoshiro256** — fixed, platform-independent stream (std distributions are
// implementation-defined, which would break the bit-reproducibility contract).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1], safe as a log argument.
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // Standard normal via Box–Muller (pair cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform_pos();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(6.283185307179586477 * v);
        have_spare_ = true;
        return r * std::cos(6.283185307179586477 * v);
    }

    double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }

    // Uniform index in [0, m).
    std::size_t index(std::size_t m) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(m)) % m;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Kahan–Neumaier compensated accumulator for exact-ish event-log integrals.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Pairwise (tree) summation: deterministic for a fixed element order and
// O(log n) error growth; the reduction used for replica aggregates.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("pairwise_mean: empty sample");
    return pairwise_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace slowbond
