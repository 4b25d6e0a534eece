#pragma once

#include <cstdint>

namespace mlmcjd::fixtures {

// Exact-solution MC price of the default call (M = 2000, K = 10^5, seed 1),
// produced by `mlmcjd reference --seed 1` and frozen here.
inline constexpr std::uint64_t kReferenceSeed = 1;
inline constexpr std::size_t kReferenceTruncation = 2000;
inline constexpr std::uint64_t kReferenceSamples = 100000;
inline constexpr double kReferenceValue = 0.83872791758993903;
inline constexpr double kReferenceCi = 0.020759676137897379;

}  // namespace mlmcjd::fixtures
