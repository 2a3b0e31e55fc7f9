// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mxp/precision.hpp"

namespace mxp::detail {

/// Invokes fn with a zero-overhead quantizer functor for the format, so hot
/// loops specialize per format instead of switching per element.
template <class F>
decltype(auto) with_quantizer(Format f, F&& fn)
{
    switch (f) {
        case Format::binary32:
            return fn([](double x) { return static_cast<double>(static_cast<float>(x)); });
        case Format::binary16:
            return fn([](double x) { return round_to(x, Format::binary16); });
        case Format::bfloat16:
            return fn([](double x) { return round_to(x, Format::bfloat16); });
        case Format::binary64:
        default:
            return fn([](double x) { return x; });
    }
}

} // namespace mxp::detail
