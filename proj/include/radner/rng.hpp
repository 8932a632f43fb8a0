// SPDX-License-Identifier: MIT
//
// Counter-based random numbers (Philox4x32-10). Every draw is addressed by
// (seed, counter) with no hidden state, so path simulations are reproducible
// bit-for-bit for a given seed regardless of evaluation order.
#pragma once

#include <array>
#include <cstdint>

namespace radner::rng {

/// One Philox4x32-10 block: 4 x 32 bits of output per (counter, key) pair.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Uniform double in (0,1), derived from a 64-bit lane of the block keyed by
/// (seed) and addressed by (stream, index, slot).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                 std::uint32_t slot);

/// Standard normal via the inverse CDF (Wichura's PPND16), same addressing.
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
              std::uint32_t slot);

/// Inverse of the standard normal CDF, accurate to ~1e-15 for p in (0,1).
double inverse_normal_cdf(double p);

/// Convenience sequential generator over a fixed (seed, stream).
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double next_uniform() { return uniform01(seed_, stream_, index_++, 0); }
    double next_normal() { return normal(seed_, stream_, index_++, 0); }

    /// Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
};

}  // namespace radner::rng
