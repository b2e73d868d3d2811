#pragma once

#include <cstdint>

#include "mbe/array2.hpp"

namespace mbe {

/// splitmix64. Fixed public constants, so seeded streams are identical on
/// every platform and toolchain; this is what run reproducibility rests on.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53 bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-a, a].
    double next_symmetric(double a) { return a * (2.0 * next_double() - 1.0); }
};

/// Row-major fill, one draw per cell.
inline Array2 white_noise(int rows, int cols, double amplitude, std::uint64_t seed) {
    Array2 out(rows, cols);
    SplitMix64 rng(seed);
    for (double& v : out.data) v = rng.next_symmetric(amplitude);
    return out;
}

}  // namespace mbe
