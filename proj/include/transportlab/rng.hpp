#pragma once

#include <cstdint>

namespace transportlab {

// SplitMix64 (Steele, Lea & Flood 2014; fixed-increment variant by Vigna).
// Constants: increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB. Used both as the per-stream generator and, via
// mix_seed, to derive independent per-population seeds from a base seed,
// so streams do not depend on iteration or worker order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as the argument of a logarithm.
    double next_double_open0() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Derives the seed for stream `index` from `base`: one SplitMix64 step from
// base + index * increment. Streams for distinct indices are decorrelated by
// the 64-bit finalizer.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    SplitMix64 g(base + index * UINT64_C(0x9E3779B97F4A7C15));
    return g.next_u64();
}

}  // namespace transportlab
