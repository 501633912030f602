#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace mmdopt {

// Gram-entry sums that feed the MMD statistic are accumulated in fixed
// point. Integer addition is associative, so a block sum is the same no
// matter which order (or which thread) visits the entries. This is what
// lets the permutation samplers agree bit-for-bit with each other and with
// mmd2_u.

inline constexpr int kFixedFractionBits = 44;
/// Entries must satisfy |x| <= kFixedMaxMagnitude to be representable.
inline constexpr double kFixedMaxMagnitude = 64.0;
/// Max entries summed in int64 before spilling into the 128-bit total.
inline constexpr std::size_t kFixedChunk = 4096;

using FixedTotal = __int128;

/// Round x * 2^44 to the nearest integer (ties to even).
inline std::int64_t to_fixed(double x) noexcept {
  constexpr double kShifter = 0x1.8p52;
  return std::bit_cast<std::int64_t>(x * 0x1.0p44 + kShifter) - std::bit_cast<std::int64_t>(kShifter);
}

inline double from_fixed(FixedTotal v) noexcept {
  return std::ldexp(static_cast<double>(v), -kFixedFractionBits);
}

/// Exact sum of to_fixed(x) over a contiguous range.
inline FixedTotal fixed_sum(const double* x, std::size_t n) noexcept {
  FixedTotal total = 0;
  for (std::size_t start = 0; start < n; start += kFixedChunk) {
    const std::size_t stop = start + kFixedChunk < n ? start + kFixedChunk : n;
    std::int64_t partial = 0;
    for (std::size_t i = start; i < stop; ++i) partial += to_fixed(x[i]);
    total += partial;
  }
  return total;
}

}  // namespace mmdopt
