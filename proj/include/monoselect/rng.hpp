#pragma once

#include <cstdint>

namespace monoselect {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Counter-keyed uniform stream: stream r of a seed is the SplitMix64 sequence
// started from a mixed (seed, r) state. Streams are independent of evaluation
// order and of how replications are partitioned across threads, so results
// are bit-reproducible for a fixed (seed, stream) pair.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(seed + 0x9E3779B97F4A7C15ull) ^
                 mix64((stream + 1) * 0xD1B54A32D192ED03ull)) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // Uniform on [0,1), 53 random bits.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

}  // namespace monoselect
