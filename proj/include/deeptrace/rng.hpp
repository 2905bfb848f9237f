#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace deeptrace {

// All randomness in the project flows from one root seed through
// derive_seed() substreams, so that independent pipeline stages and
// parallel workers draw from disjoint, reproducible streams.
//
// Substream derivation: the root seed and each tag word are absorbed
// through splitmix64 steps; string tags are FNV-1a hashed first.

uint64_t splitmix64(uint64_t& state);

uint64_t derive_seed(uint64_t root, uint64_t tag);
uint64_t derive_seed(uint64_t root, uint64_t tag_a, uint64_t tag_b);
uint64_t derive_seed(uint64_t root, std::string_view tag);
uint64_t derive_seed(uint64_t root, std::string_view tag, uint64_t index);

/// xoshiro256** generator. Self-contained so that sampled values are
/// identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next();

    /// Uniform integer in [0, n). Rejection sampling, exactly uniform.
    uint64_t bounded(uint64_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double real();

    /// Fisher-Yates shuffle driven by this generator.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (size_t i = values.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::array<uint64_t, 4> state_;
};

}  // namespace deeptrace
