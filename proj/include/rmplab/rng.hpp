#pragma once

// Counter-based random streams. Each path gets its own generator derived
// from (master seed, path index) alone, so results never depend on how
// paths are distributed over workers.

#include <cstdint>

namespace rmp {

inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : s_(seed) {}

    uint64_t next() {
        s_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = s_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in {0, ..., n-1} by rejection-free scaling (n small here)
    uint64_t below(uint64_t n) { return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n; }

private:
    uint64_t s_;
};

inline SplitMix64 path_rng(uint64_t master_seed, uint64_t path_index) {
    return SplitMix64(mix64(mix64(master_seed) ^ mix64(path_index + 0x5851F42D4C957F2Dull)));
}

// stable derivation of sub-seeds for named stages ("per n", "per chain"...)
inline uint64_t derive_seed(uint64_t master_seed, uint64_t tag) {
    return mix64(mix64(master_seed + 0x9E3779B97F4A7C15ull) ^ mix64(tag));
}

}  // namespace rmp
