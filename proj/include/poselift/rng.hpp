#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace poselift {

/// Deterministic 64-bit PRNG with platform-independent output.
///
/// The engine is std::mt19937_64, whose raw output is specified bit-exactly
/// by the C++ standard. The standard-library *distributions* are not, so all
/// conversions to doubles and bounded integers are done here with fixed
/// arithmetic:
///   - uniform double in [0,1): (x >> 11) * 2^-53
///   - bounded integer in [0,n): 128-bit multiply-high of the raw draw
///   - standard normal: Box-Muller on two uniform draws (pairs are cached,
///     so draw order is part of the state)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace poselift
