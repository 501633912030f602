#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mmdopt/estimators.hpp"
#include "mmdopt/kernels.hpp"

namespace mmdopt {

/// Kernel-choice methods compared in the Blobs power experiment. `best` is
/// the oracle grid bandwidth with the highest rejection rate per epsilon.
enum class Method { median, max_mmd, max_t, max_power, best };

std::string_view to_string(Method m);
/// Accepts "median", "max-mmd", "max-t", "max-power", "best".
Method parse_method(std::string_view name);

/// `count` log-spaced RBF bandwidths over [lo, hi].
std::vector<KernelSpec> log_bandwidth_grid(double lo, double hi, std::size_t count);

struct BlobsProtocol {
  std::size_t m = 500;  // size of each half; 2m points per sample are drawn and split evenly
  double alpha = 0.1;
  std::size_t permutations = 1000;
  std::size_t selection_permutations = 100;  // null rounds per candidate for max-power
  std::vector<KernelSpec> grid = log_bandwidth_grid(0.1, 100.0, 30);
  std::vector<Method> methods{Method::median, Method::max_mmd, Method::max_t};
  std::size_t threads = 1;
  double floor = kDefaultVarianceFloor;
};

struct MethodOutcome {
  Method method = Method::median;
  double bandwidth = 0;
  bool reject = false;
  double p_value = 1;
};

struct TrialResult {
  std::vector<MethodOutcome> outcomes;  // one per non-oracle method, in protocol order
  std::vector<char> grid_rejects;       // per grid point; filled only when `best` is requested
};

/// One run: draw Blobs, split into train/test, choose a kernel per method on
/// the training half, test on the held-out half.
TrialResult blobs_trial(const BlobsProtocol& protocol, double epsilon, std::uint64_t seed);

struct PowerCurveRow {
  double epsilon = 0;
  Method method = Method::median;
  double rejection_rate = 0;
  double stderr_ = 0;  // binomial standard error of the rate
  std::size_t reps = 0;
  double bandwidth = 0;  // only for `best`: the winning grid bandwidth
};

struct ChoiceRow {
  double epsilon = 0;
  std::size_t rep = 0;
  Method method = Method::median;
  double bandwidth = 0;
  bool reject = false;
};

struct PowerCurve {
  std::vector<PowerCurveRow> rows;  // epsilon-major, methods in protocol order
  std::vector<ChoiceRow> choices;
};

/// Seed of run `rep`; shared across epsilons so X is common to all of them.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t rep);

using TrialCallback = std::function<void(double epsilon, std::size_t rep)>;

PowerCurve power_curve(const BlobsProtocol& protocol, std::span<const double> epsilons, std::size_t reps,
                       std::uint64_t seed, const TrialCallback& on_trial = {});

}  // namespace mmdopt
