// SPDX-License-Identifier: Apache-2.0
#include "mxp/rng.hpp"

#include <cmath>
#include <numbers>

namespace mxp {

namespace {

// Sub-stream tags for the two Box-Muller uniforms. They live above bit 32
// of the stream id so they can never collide with caller-facing stream ids.
constexpr std::uint64_t kGaussTagA = 1ull << 32;
constexpr std::uint64_t kGaussTagB = 2ull << 32;

} // namespace

double uniform_element(const StreamKey& key) {
    const double u = detail::bits_to_unit(element_bits(key));
    return 2.0 * u - 1.0; // exact: Sterbenz for u >= 1/2, exact scaling below
}

double gaussian_element(const StreamKey& key) {
    StreamKey ka = key;
    ka.stream_id = key.stream_id ^ kGaussTagA;
    StreamKey kb = key;
    kb.stream_id = key.stream_id ^ kGaussTagB;

    // A zero mantissa is treated as 2^-53 so the log argument stays positive.
    std::uint64_t m = element_bits(ka) >> 11;
    if (m == 0) m = 1;
    const double u1 = static_cast<double>(m) * 0x1p-53;
    const double u2 = detail::bits_to_unit(element_bits(kb));

    const double radius = std::sqrt(-2.0 * std::log(u1));
    return radius * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace mxp
