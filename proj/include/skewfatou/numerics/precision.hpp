#pragma once

#include <cmath>

#include "skewfatou/error.hpp"
#include "skewfatou/numerics/big_float.hpp"

namespace skewfatou {

inline constexpr Precision kDefaultGuardBits = 64;

/// Working precision for a depth-n Koenigs computation: ceil(2 n log2|lambda|) + guard.
///
/// One factor |lambda| of error growth per step is paid twice: once to reach
/// depth n and once more in the derivative products along the same orbit.
inline Precision precision_for_depth(long depth, double lambda_abs, Precision guard_bits = kDefaultGuardBits) {
    if (depth < 1) throw Error(ErrorKind::Usage, "depth must be >= 1");
    if (!(lambda_abs > 1.0)) throw Error(ErrorKind::Usage, "|lambda| must exceed 1");
    const double bits = 2.0 * static_cast<double>(depth) * std::log2(lambda_abs);
    // Exact powers of two must not be pushed up by log2 rounding noise.
    const double rounded = std::round(bits);
    const double whole = std::fabs(bits - rounded) < 1e-9 ? rounded : std::ceil(bits);
    return static_cast<Precision>(whole) + guard_bits;
}

}  // namespace skewfatou
