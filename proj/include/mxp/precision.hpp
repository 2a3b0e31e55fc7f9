// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mxp {

static_assert(std::numeric_limits<double>::is_iec559,
              "IEEE-754 binary64 arithmetic is assumed throughout");

/// Floating-point formats emulated on top of binary64 storage.
///
/// A value v "is in format f" when round_to(v, f) == v. All reduced-precision
/// arithmetic in this project is expressed as binary64 operations whose
/// results are re-quantized with round_to; this keeps one binary portable
/// across hardware with and without native half-precision units.
enum class Format : std::uint8_t {
    binary64,
    binary32,
    binary16,
    bfloat16,
};

/// Static parameters of a format. precision_bits counts the significand
/// including the implicit leading bit.
struct FormatInfo {
    std::string_view name;      // CLI spelling
    int precision_bits;
    int exponent_bits;
    int min_exponent;           // smallest normal exponent (unbiased)
    int max_exponent;           // largest finite exponent (unbiased)
    double max_finite;
    bool supports_subnormals;
};

const FormatInfo& format_info(Format fmt);

/// Unit roundoff u = 2^(-precision_bits).
double unit_roundoff(Format fmt);

/// Parses the CLI spelling {fp64, fp32, fp16, bf16}. Throws std::invalid_argument.
Format parse_format(std::string_view name);

const char* format_name(Format fmt);

namespace detail {
// Round-to-nearest-even quantization of a finite binary64 value into an
// arbitrary (p, emin, emax) format, result held in binary64. Out-of-range
// magnitudes round to +/-inf; target subnormals are honored.
double quantize(double x, int precision_bits, int min_exponent, double max_finite);
} // namespace detail

/// Nearest value representable in fmt, ties to even, held in binary64.
/// Magnitudes past the format's overflow threshold return +/-inf.
inline double round_to(double x, Format fmt) {
    switch (fmt) {
        case Format::binary64:
            return x;
        case Format::binary32:
            // The hardware narrowing cast is exactly round-to-nearest-even
            // with binary32 subnormal and overflow behavior.
            return static_cast<double>(static_cast<float>(x));
        case Format::binary16:
            return detail::quantize(x, 11, -14, 65504.0);
        case Format::bfloat16:
            return detail::quantize(x, 8, -126, 0x1.FEp127);
    }
    return x; // unreachable
}

/// True iff x survives quantization to fmt without overflowing to infinity.
inline bool fits(double x, Format fmt) {
    return std::isfinite(round_to(x, fmt));
}

} // namespace mxp
