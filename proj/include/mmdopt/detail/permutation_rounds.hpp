#pragma once

// Per-round kernels of the permutation samplers, templated on how Gram
// entries are read so that tests and the access audit can substitute an
// instrumented reader.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "mmdopt/fixed_point.hpp"
#include "mmdopt/rng.hpp"

namespace mmdopt::detail {

/// Plain reader over a row-major n x n matrix.
struct DirectReader {
  const double* data;
  std::size_t n;

  double load(std::size_t a, std::size_t b) const noexcept { return data[a * n + b]; }
};

/// Uniform permutation of [0, pooled) for round `round` of seed `seed`.
inline void round_permutation(std::uint64_t seed, std::uint64_t round, std::span<std::uint32_t> perm) {
  std::iota(perm.begin(), perm.end(), std::uint32_t{0});
  RandomStream rng(seed, StreamTag::permutation, round);
  shuffle(perm, rng);
}

/// Scratch owned by one worker: the inverse map of the current permutation.
struct RoundLabels {
  std::vector<std::int64_t> second_mask;  // all-ones where the point lands in the second half
  std::vector<std::uint32_t> partner;     // point sharing this point's pair index across halves

  explicit RoundLabels(std::size_t pooled) : second_mask(pooled), partner(pooled) {}

  void assign(std::span<const std::uint32_t> perm) {
    const std::size_t m = perm.size() / 2;
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t x = perm[i];
      const std::uint32_t y = perm[i + m];
      second_mask[x] = 0;
      second_mask[y] = -1;
      partner[x] = y;
      partner[y] = x;
    }
  }
};

/// Fixed-point row sums over columns [lo, hi): all entries and the
/// second-half entries.
template <typename Reader>
inline void scan_row(const Reader& k, std::size_t a, std::size_t lo, std::size_t hi, const std::int64_t* mask,
                     FixedTotal& all, FixedTotal& second) {
  for (std::size_t start = lo; start < hi; start += kFixedChunk) {
    const std::size_t stop = start + kFixedChunk < hi ? start + kFixedChunk : hi;
    std::int64_t part_all = 0;
    std::int64_t part_second = 0;
    for (std::size_t b = start; b < stop; ++b) {
      const std::int64_t q = to_fixed(k.load(a, b));
      part_all += q;
      part_second += q & mask[b];
    }
    all += part_all;
    second += part_second;
  }
}

/// m(m-1) * MMD^2_u of the split described by `labels`, in fixed point.
/// Walks the strict upper triangle once in row-major order; each entry is
/// read exactly once and the read addresses increase monotonically.
template <typename Reader>
FixedTotal sequential_round(const Reader& k, std::size_t pooled, const RoundLabels& labels) {
  FixedTotal s_xx = 0, s_yy = 0, s_xy = 0, trace = 0;
  const std::int64_t* mask = labels.second_mask.data();
  for (std::size_t a = 0; a + 1 < pooled; ++a) {
    FixedTotal all = 0, second = 0;
    const std::size_t p = labels.partner[a];
    if (p > a) {
      scan_row(k, a, a + 1, p, mask, all, second);
      const std::int64_t q = to_fixed(k.load(a, p));
      trace += q;
      all += q;
      second += q & mask[p];
      scan_row(k, a, p + 1, pooled, mask, all, second);
    } else {
      scan_row(k, a, a + 1, pooled, mask, all, second);
    }
    const FixedTotal first = all - second;
    if (mask[a] == 0) {
      s_xx += first;
      s_xy += second;
    } else {
      s_xy += first;
      s_yy += second;
    }
  }
  return 2 * (s_xx + s_yy - s_xy + trace);
}

/// Several rounds in one pass: each stretch of a row is read once into a
/// small buffer and every round's split sums are taken from the buffer, so
/// memory traffic is shared by the batch. Per round, reads are still
/// monotone and touch each upper-triangle entry once; fixed-point sums make
/// the result identical to sequential_round.
template <typename Reader>
void batched_rounds(const Reader& k, std::size_t pooled, std::span<const RoundLabels> labels,
                    std::span<FixedTotal> out) {
  constexpr std::size_t kStretch = 1024;
  const std::size_t rounds = labels.size();
  std::vector<FixedTotal> s_xx(rounds, 0), s_yy(rounds, 0), s_xy(rounds, 0), trace(rounds, 0), second(rounds);
  std::vector<std::int64_t> q(kStretch);
  for (std::size_t a = 0; a + 1 < pooled; ++a) {
    FixedTotal all = 0;
    std::ranges::fill(second, 0);
    for (std::size_t start = a + 1; start < pooled; start += kStretch) {
      const std::size_t len = start + kStretch < pooled ? kStretch : pooled - start;
      std::int64_t part_all = 0;
      for (std::size_t i = 0; i < len; ++i) {
        q[i] = to_fixed(k.load(a, start + i));
        part_all += q[i];
      }
      all += part_all;
      for (std::size_t r = 0; r < rounds; ++r) {
        const std::int64_t* mask = labels[r].second_mask.data() + start;
        std::int64_t part = 0;
        for (std::size_t i = 0; i < len; ++i) part += q[i] & mask[i];
        second[r] += part;
        const std::size_t p = labels[r].partner[a];
        if (p >= start && p < start + len) trace[r] += q[p - start];
      }
    }
    for (std::size_t r = 0; r < rounds; ++r) {
      const FixedTotal first = all - second[r];
      if (labels[r].second_mask[a] == 0) {
        s_xx[r] += first;
        s_xy[r] += second[r];
      } else {
        s_xy[r] += first;
        s_yy[r] += second[r];
      }
    }
  }
  for (std::size_t r = 0; r < rounds; ++r) out[r] = 2 * (s_xx[r] + s_yy[r] - s_xy[r] + trace[r]);
}

/// Reference round: copies the kernel matrix into permuted order, then sums
/// the blocks of the copy.
template <typename Reader>
FixedTotal materialized_round(const Reader& k, std::span<const std::uint32_t> perm, std::vector<double>& copy) {
  const std::size_t n = perm.size();
  const std::size_t m = n / 2;
  copy.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = copy.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] = k.load(perm[i], perm[j]);
  }
  FixedTotal s_xx = 0, s_yy = 0, s_xy = 0, trace = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = copy.data() + i * n;
    s_xx += fixed_sum(row + i + 1, m - i - 1);
    s_xy += fixed_sum(row + m, m);
    trace += to_fixed(row[m + i]);
  }
  for (std::size_t i = m; i < n; ++i) {
    s_yy += fixed_sum(copy.data() + i * n + i + 1, n - i - 1);
  }
  return 2 * (s_xx + s_yy - s_xy + trace);
}

}  // namespace mmdopt::detail
