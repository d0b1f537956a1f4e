#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace homodyne {

/// Wraps a seed so configs and call sites cannot confuse it with other
/// integer parameters. Identical seed + identical config gives bit-identical
/// simulation output.
struct RngSeed {
    std::uint64_t value = 0;
};

/// splitmix64 step (Steele, Lea, Vigna). Used to derive independent
/// sub-stream seeds (per trace kind, per sweep frequency) from one base
/// seed, so results do not depend on evaluation order or thread schedule.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline RngSeed derive_seed(RngSeed base, std::uint64_t stream_tag) {
    return RngSeed{splitmix64(base.value + 0x632BE59BD9B4E019ull * (stream_tag + 1))};
}

/// Deterministic Gaussian source.
///
/// Core generator is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard, so identical seeds reproduce identical streams on any
/// conforming implementation. Uniform and normal variates are derived here
/// explicitly (53-bit mantissa mapping, basic Box-Muller) instead of through
/// std::*_distribution, whose algorithms are implementation-defined.
class GaussianRng {
public:
    explicit GaussianRng(RngSeed seed) : engine_(seed.value) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; caches the second variate of each pair.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * pi_ * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr double pi_ = 3.141592653589793238462643383279502884;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace homodyne
