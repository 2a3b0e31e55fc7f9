// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace mxp {

/// Addresses one pseudorandom draw. Every draw is a pure function of the
/// whole tuple, so any matrix entry can be generated independently of all
/// others, in any order, on any number of workers.
///
/// Stream ids 0..2 are reserved: 0 = matrix elements, 1 = right-hand side,
/// 2 = diagonal-sign stream. Bits 32+ of stream_id are used internally for
/// derived sub-streams and must stay clear in caller-facing keys.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t i = 0;
    std::uint64_t j = 0;
};

inline constexpr std::uint64_t kMatrixStream = 0;
inline constexpr std::uint64_t kRhsStream = 1;
inline constexpr std::uint64_t kDiagSignStream = 2;

/// SplitMix64 finalizer: a bijective avalanche mixer on 64-bit words.
/// Fixed bit-exactly; all arithmetic is modulo 2^64.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// The 64 raw bits behind a key:
///   mix64(mix64(seed ^ mix64(stream_id)) ^ (i * 2^32 + j)), mod 2^64.
constexpr std::uint64_t element_bits(const StreamKey& key) {
    const std::uint64_t prefix = mix64(key.seed ^ mix64(key.stream_id));
    return mix64(prefix ^ ((key.i << 32) + key.j));
}

/// Caches the (seed, stream) prefix so bulk generation pays one mix64 per
/// element. Produces bit-identical values to element_bits.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : prefix_(mix64(seed ^ mix64(stream_id))) {}

    std::uint64_t bits(std::uint64_t i, std::uint64_t j) const {
        return mix64(prefix_ ^ ((i << 32) + j));
    }

private:
    std::uint64_t prefix_;
};

/// Uniform draw in [-1, 1): the top 53 bits of the raw word become
/// u in [0,1), mapped through 2u - 1 (both steps exact in binary64).
double uniform_element(const StreamKey& key);

/// Standard normal deviate via the Box-Muller transform on two uniform
/// sub-draws of the same (i, j) address. Pure function of the key.
double gaussian_element(const StreamKey& key);

namespace detail {
inline double bits_to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1p-53;
}
} // namespace detail

} // namespace mxp
