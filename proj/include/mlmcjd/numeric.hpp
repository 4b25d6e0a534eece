#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mlmcjd {

/// Ceiling that treats values within a relative 1e-12 of an integer as that
/// integer, so that e.g. 2 * 0.1^-2 * 0.04 sizes to 8 rather than 9.
inline std::uint64_t snapped_ceil(double x) {
    if (!std::isfinite(x)) throw std::domain_error("snapped_ceil: non-finite argument");
    if (x < 0.0) throw std::domain_error("snapped_ceil: negative argument");
    if (x >= 1.8e19) throw std::overflow_error("snapped_ceil: argument exceeds 64-bit range");
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, nearest)) return static_cast<std::uint64_t>(nearest);
    return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace mlmcjd
