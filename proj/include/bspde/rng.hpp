#pragma once

#include <cstdint>

namespace bspde {

// Counter-based generator: draw k of a stream with seed s is
//   mix(s + (k+1) * 0x9E3779B97F4A7C15)
// where mix is the splitmix64 finalizer. Streams are reproducible from the
// (seed, counter) pair alone, so independent consumers can replay them.
struct CounterRng {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t next_u64() {
        ++counter;
        return mix(seed + counter * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform integer in [lo, hi] inclusive.
    long next_int(long lo, long hi) {
        return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

} // namespace bspde
