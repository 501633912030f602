#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmdopt/kernels.hpp"

namespace mmdopt {

/// Permutation null samples of MMD^2_u. Values are stored unscaled; the
/// test statistic m * MMD^2_u is formed at comparison time.
struct NullSamples {
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t permutations() const noexcept { return values.size(); }
};

enum class SamplerVariant { optimized, naive };

/// MMD^2_u of the original split (first m pooled points vs last m).
double observed_mmd2(const JointGram& k);

/// Null samples by sequential traversal of K under the inverse permutation
/// map. Round b uses permutation stream (seed, b), so the output does not
/// depend on `threads`.
NullSamples sample_null_optimized(const JointGram& k, std::size_t permutations, std::uint64_t seed,
                                  std::size_t threads = 1);

/// Same contract, computed by materializing a permuted copy of K each round.
NullSamples sample_null_naive(const JointGram& k, std::size_t permutations, std::uint64_t seed);

NullSamples sample_null(SamplerVariant variant, const JointGram& k, std::size_t permutations, std::uint64_t seed,
                        std::size_t threads = 1);

/// Conservative permutation quantile: the ceil((1 - alpha)(B + 1))-th
/// smallest value, clamped to the maximum. Unscaled, like the samples.
double threshold(const NullSamples& null, double alpha);

/// (1 + #{b : m * values_b >= statistic}) / (B + 1).
double p_value(const NullSamples& null, double statistic, std::size_t m);

struct TestResult {
  double statistic = 0;  // m * MMD^2_u
  double threshold = 0;  // m * permutation quantile
  double p_value = 1;
  bool reject = false;
  double alpha = 0;
  std::size_t permutations = 0;
  double mmd2 = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
};

TestResult two_sample_test(const Dataset& x, const Dataset& y, const KernelSpec& spec, double alpha,
                           std::size_t permutations, std::uint64_t seed, std::size_t threads = 1);

/// Test on a prebuilt joint Gram.
TestResult two_sample_test(const JointGram& k, double alpha, std::size_t permutations, std::uint64_t seed,
                           std::size_t threads = 1);

}  // namespace mmdopt
