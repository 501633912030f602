#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmdopt/estimators.hpp"
#include "mmdopt/kernels.hpp"

namespace mmdopt {

enum class Criterion { max_mmd, max_t, max_power, median };

std::string_view to_string(Criterion c);
/// Accepts "max-mmd", "max-t", "max-power", "median".
Criterion parse_criterion(std::string_view name);

inline constexpr std::size_t kDefaultMedianCap = 2000;

/// Median pairwise Euclidean distance over the pooled sample X u Y. Uses a
/// seeded uniform subsample of `cap` points when the pool is larger.
double median_heuristic(const Dataset& x, const Dataset& y, std::size_t cap = kDefaultMedianCap,
                        std::uint64_t seed = 0);

/// `count` log-spaced RBF bandwidths from center/factor to center*factor.
std::vector<KernelSpec> bandwidth_grid(double center, std::size_t count = 30, double factor = 32.0);

struct CandidateScore {
  KernelSpec spec;
  double mmd2 = 0;
  double variance = 0;
  double t_stat = 0;
  double power_estimate = 0;  // NaN unless the criterion is max-power
};

struct SelectionReport {
  Criterion criterion = Criterion::max_t;
  std::vector<CandidateScore> candidates;
  std::size_t chosen = 0;
  std::uint64_t split_seed = 0;

  const KernelSpec& chosen_spec() const { return candidates.at(chosen).spec; }
};

struct SelectionOptions {
  double alpha = 0.1;
  std::size_t permutations = 1000;  // only used by max-power
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double floor = kDefaultVarianceFloor;
};

/// Value of the criterion column for one candidate.
double criterion_value(const CandidateScore& c, Criterion criterion);

/// Index maximizing the criterion; ties go to the smallest bandwidth, then
/// the lower index. NaN scores never win.
std::size_t argmax_candidate(std::span<const CandidateScore> candidates, Criterion criterion);

/// Scores every candidate on (X, Y) and picks the best under `criterion`
/// (max-mmd, max-t or max-power).
SelectionReport grid_select(const Dataset& x, const Dataset& y, std::span<const KernelSpec> candidates,
                            Criterion criterion, const SelectionOptions& options = {});

/// Single-candidate report for the median-heuristic RBF kernel.
SelectionReport median_select(const Dataset& x, const Dataset& y, const SelectionOptions& options = {});

struct TrainTestSplit {
  Dataset x_train, y_train, x_test, y_test;
  std::vector<std::size_t> x_train_index, x_test_index, y_train_index, y_test_index;
};

/// Seeded split without replacement; round(fraction * m) rows of each of X
/// and Y go to training. Both halves need at least 4 rows.
TrainTestSplit split_train_test(const Dataset& x, const Dataset& y, double fraction, std::uint64_t seed);

/// Gradient of t-hat with respect to KernelSpec::parameters().
struct TStatGradient {
  EstimatorOutput value;
  std::vector<double> gradient;
};

TStatGradient t_stat_gradient(const KernelSpec& spec, const Dataset& x, const Dataset& y,
                              double floor = kDefaultVarianceFloor);

/// d t-hat / d K for each GramBundle matrix. Diagonals of the Ktxx/Ktyy
/// sensitivities are zero.
struct GramSensitivity {
  EstimatorOutput value;
  Matrix kxy;
  Matrix ktxx;
  Matrix ktyy;
};

GramSensitivity t_stat_sensitivity(const GramBundle& g, double floor = kDefaultVarianceFloor);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t iterations = 100;
  std::size_t batch_size = 500;
  double floor = kDefaultVarianceFloor;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainResult {
  KernelSpec spec;
  std::vector<double> trace;  // t-hat on each iteration's minibatch, before its update
};

/// Stochastic gradient ascent of t-hat over the kernel's log-parameters with
/// Adam-style moment estimates.
TrainResult train_ard(const Dataset& x_train, const Dataset& y_train, const KernelSpec& init, const TrainConfig& cfg);

}  // namespace mmdopt
