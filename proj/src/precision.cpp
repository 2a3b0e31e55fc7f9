// SPDX-License-Identifier: Apache-2.0
#include "mxp/precision.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace mxp {

namespace {

constexpr std::array<FormatInfo, 4> kFormats = {{
    // name, p, exp bits, emin, emax, max_finite, subnormals
    {"fp64", 53, 11, -1022, 1023, std::numeric_limits<double>::max(), true},
    {"fp32", 24, 8, -126, 127, 0x1.FFFFFEp127, true},
    {"fp16", 11, 5, -14, 15, 65504.0, true},
    {"bf16", 8, 8, -126, 127, 0x1.FEp127, true},
}};

} // namespace

const FormatInfo& format_info(Format fmt) {
    return kFormats[static_cast<std::size_t>(fmt)];
}

double unit_roundoff(Format fmt) {
    return std::ldexp(1.0, -format_info(fmt).precision_bits);
}

Format parse_format(std::string_view name) {
    for (std::size_t k = 0; k < kFormats.size(); ++k) {
        if (kFormats[k].name == name) return static_cast<Format>(k);
    }
    throw std::invalid_argument("unknown format '" + std::string(name) +
                                "' (expected fp64, fp32, fp16, or bf16)");
}

const char* format_name(Format fmt) {
    return format_info(fmt).name.data();
}

namespace detail {

double quantize(double x, int precision_bits, int min_exponent, double max_finite) {
    if (!std::isfinite(x)) return x; // +/-inf and NaN pass through
    if (x == 0.0) return x;          // preserves the sign of zero

    // Spacing of the target format around x: 2^(e - (p-1)) for normals,
    // pinned at the subnormal spacing below the smallest normal exponent.
    int e = std::ilogb(x);
    if (e < min_exponent) e = min_exponent;
    const int ulp_exp = e - (precision_bits - 1);

    // x * 2^-ulp_exp is exact (|scaled| < 2^p <= 2^53 for normals; for
    // values far above the overflow threshold it stays within one binade
    // of x's own ulp grid), so rint introduces the only rounding.
    const double scaled = std::scalbn(x, -ulp_exp);
    const double rounded = std::rint(scaled); // ties to even in the default mode
    const double result = std::scalbn(rounded, ulp_exp);

    if (std::fabs(result) > max_finite) {
        return std::copysign(std::numeric_limits<double>::infinity(), x);
    }
    return result;
}

} // namespace detail

} // namespace mxp
