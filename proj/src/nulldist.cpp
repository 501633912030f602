#include "mmdopt/nulldist.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mmdopt/detail/permutation_rounds.hpp"
#include "mmdopt/error.hpp"
#include "mmdopt/estimators.hpp"

namespace mmdopt {

namespace {

void check_sampler_args(const JointGram& k, std::size_t permutations) {
  if (permutations == 0) throw std::invalid_argument("need at least one permutation");
  if (k.m < 2) throw NumericalError("permutation test needs at least 2 samples per side");
  if (k.k.rows() != 2 * k.m || k.k.cols() != 2 * k.m) throw DataError("joint Gram has wrong shape");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

double observed_mmd2(const JointGram& k) {
  if (k.m < 2) throw NumericalError("MMD estimate needs at least 2 samples per side");
  const std::size_t n = k.pooled();
  std::vector<std::uint32_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::uint32_t{0});
  detail::RoundLabels labels(n);
  labels.assign(identity);
  const detail::DirectReader reader{k.k.data(), n};
  return mmd2_from_numerator(detail::sequential_round(reader, n, labels), k.m);
}

NullSamples sample_null_optimized(const JointGram& k, std::size_t permutations, std::uint64_t seed,
                                  std::size_t threads) {
  check_sampler_args(k, permutations);
  if (threads == 0) throw std::invalid_argument("need at least one thread");
  const std::size_t n = k.pooled();
  NullSamples out{std::vector<double>(permutations), seed};
  const detail::DirectReader reader{k.k.data(), n};

  // Rounds are processed in small batches that share one pass over K.
  constexpr std::size_t kBatch = 8;
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> perm(n);
    std::vector<detail::RoundLabels> labels(kBatch, detail::RoundLabels(n));
    std::vector<FixedTotal> numerators(kBatch);
    for (std::size_t b = begin; b < end; b += kBatch) {
      const std::size_t count = std::min(kBatch, end - b);
      for (std::size_t r = 0; r < count; ++r) {
        detail::round_permutation(seed, b + r, perm);
        labels[r].assign(perm);
      }
      detail::batched_rounds(reader, n, std::span<const detail::RoundLabels>(labels.data(), count),
                             std::span<FixedTotal>(numerators.data(), count));
      for (std::size_t r = 0; r < count; ++r) out.values[b + r] = mmd2_from_numerator(numerators[r], k.m);
    }
  };

  threads = std::min(threads, permutations);
  if (threads == 1) {
    work(0, permutations);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(work, permutations * t / threads, permutations * (t + 1) / threads);
    }
  }
  return out;
}

NullSamples sample_null_naive(const JointGram& k, std::size_t permutations, std::uint64_t seed) {
  check_sampler_args(k, permutations);
  const std::size_t n = k.pooled();
  NullSamples out{std::vector<double>(permutations), seed};
  const detail::DirectReader reader{k.k.data(), n};
  std::vector<std::uint32_t> perm(n);
  std::vector<double> copy;
  for (std::size_t b = 0; b < permutations; ++b) {
    detail::round_permutation(seed, b, perm);
    out.values[b] = mmd2_from_numerator(detail::materialized_round(reader, perm, copy), k.m);
  }
  return out;
}

NullSamples sample_null(SamplerVariant variant, const JointGram& k, std::size_t permutations, std::uint64_t seed,
                        std::size_t threads) {
  return variant == SamplerVariant::optimized ? sample_null_optimized(k, permutations, seed, threads)
                                              : sample_null_naive(k, permutations, seed);
}

double threshold(const NullSamples& null, double alpha) {
  check_alpha(alpha);
  const std::size_t b = null.values.size();
  if (b == 0) throw std::invalid_argument("no null samples");
  // The small slack absorbs representation error in (1 - alpha) * (B + 1).
  const double rank = std::ceil((1.0 - alpha) * static_cast<double>(b + 1) - 1e-9);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(rank, 1.0)), 1, b);
  std::vector<double> sorted = null.values;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

double p_value(const NullSamples& null, double statistic, std::size_t m) {
  const double scale = static_cast<double>(m);
  const auto count = std::ranges::count_if(null.values, [&](double v) { return scale * v >= statistic; });
  return static_cast<double>(1 + count) / static_cast<double>(null.values.size() + 1);
}

TestResult two_sample_test(const JointGram& k, double alpha, std::size_t permutations, std::uint64_t seed,
                           std::size_t threads) {
  check_alpha(alpha);
  const NullSamples null = sample_null_optimized(k, permutations, seed, threads);
  TestResult r;
  r.m = k.m;
  r.alpha = alpha;
  r.permutations = permutations;
  r.seed = seed;
  r.mmd2 = observed_mmd2(k);
  const double scale = static_cast<double>(k.m);
  r.statistic = scale * r.mmd2;
  r.threshold = scale * threshold(null, alpha);
  r.p_value = p_value(null, r.statistic, k.m);
  r.reject = r.statistic > r.threshold;
  return r;
}

TestResult two_sample_test(const Dataset& x, const Dataset& y, const KernelSpec& spec, double alpha,
                           std::size_t permutations, std::uint64_t seed, std::size_t threads) {
  check_alpha(alpha);
  return two_sample_test(joint_gram(spec, x, y), alpha, permutations, seed, threads);
}

}  // namespace mmdopt
