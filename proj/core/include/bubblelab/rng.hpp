#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bubblelab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based generator: draw k of stream s depends only on (seed, s, k),
/// so work split across threads reproduces the serial sequence.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(seed ^ splitmix64(stream ^ 0xa0761d6478bd642fULL))) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace bubblelab
