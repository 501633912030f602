#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mmdopt/kernels.hpp"

namespace mmdopt {

/// Empirical witness (1/m) sum_i k(X_i, t) - (1/n) sum_j k(Y_j, t) at each
/// probe row t. X and Y may have different sizes.
std::vector<double> witness(const KernelSpec& spec, const Dataset& x, const Dataset& y, const Dataset& probes);

struct Extremes {
  std::vector<std::size_t> top_positive;  // by descending value
  std::vector<std::size_t> top_negative;  // by ascending value
};

/// Indices of the k largest and k smallest values; ties go to the lower index.
Extremes extremes(std::span<const double> values, std::size_t k);

struct WitnessReport {
  std::vector<double> values;
  std::vector<std::size_t> top_positive;
  std::vector<std::size_t> top_negative;
  /// Mean witness over probes labeled 0 minus mean over probes labeled 1.
  std::optional<double> mean_gap;
};

/// `labels`, when non-empty, assigns each probe to group 0 or 1.
WitnessReport witness_report(const KernelSpec& spec, const Dataset& x, const Dataset& y, const Dataset& probes,
                             std::size_t k, std::span<const int> labels = {});

}  // namespace mmdopt
