#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace lemni {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream, counter), so trial k sees the same numbers no matter how
/// many threads run or in which order the trials execute.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform on the disk of given radius (area measure).
    std::complex<double> uniform_disk(double radius) {
        const double r = radius * std::sqrt(next_double());
        const double a = 2.0 * M_PI * next_double();
        return std::polar(r, a);
    }

    /// Uniform on the annulus r_inner <= |z| < r_outer (area measure).
    std::complex<double> uniform_annulus(double r_inner, double r_outer) {
        const double u = next_double();
        const double r = std::sqrt(r_inner * r_inner + u * (r_outer * r_outer - r_inner * r_inner));
        return std::polar(r, 2.0 * M_PI * next_double());
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t state_;
};

} // namespace lemni
