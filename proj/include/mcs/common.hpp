#pragma once

// Shared scalar helpers and a deterministic random source.  Random streams
// are built from explicit 64-bit seeds only, and all floating point draws go
// through fixed bit manipulations, so a given seed reproduces byte-identical
// results on any platform.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

inline double sq(double x) { return x * x; }

// Raised when an argument violates an operation's contract.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a computation cannot meet its own quality requirements
// (mesh too coarse, bisection bracket lost, non-convergent iteration).
struct numeric_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64, used to derive independent stream seeds from (seed, index) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ull + (h << 6);
    h = splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ull + (h << 6);
    return splitmix64(s);
}

// xoshiro256** with explicit double conversion.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (deterministic, no library distributions).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    Vec normal_vec(int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Vec unit_vec(int n) {
        Vec v = normal_vec(n);
        double nn = v.norm();
        while (nn < 1e-12) {
            v = normal_vec(n);
            nn = v.norm();
        }
        return v / nn;
    }

    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mcs
