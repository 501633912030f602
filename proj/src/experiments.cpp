#include "mmdopt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mmdopt/datasets.hpp"
#include "mmdopt/nulldist.hpp"
#include "mmdopt/rng.hpp"
#include "mmdopt/selection.hpp"

namespace mmdopt {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::median: return "median";
    case Method::max_mmd: return "max-mmd";
    case Method::max_t: return "max-t";
    case Method::max_power: return "max-power";
    case Method::best: return "best";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::median, Method::max_mmd, Method::max_t, Method::max_power, Method::best}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<KernelSpec> log_bandwidth_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw std::invalid_argument("grid needs 0 < lo <= hi");
  if (count == 0) throw std::invalid_argument("grid needs at least one point");
  std::vector<KernelSpec> grid;
  grid.reserve(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    KernelSpec s;
    s.log_bandwidth = a + t * (b - a);
    grid.push_back(s);
  }
  return grid;
}

namespace {

Criterion criterion_for(Method m) {
  switch (m) {
    case Method::max_mmd: return Criterion::max_mmd;
    case Method::max_t: return Criterion::max_t;
    case Method::max_power: return Criterion::max_power;
    default: return Criterion::median;
  }
}

bool wants(const BlobsProtocol& p, Method m) { return std::ranges::find(p.methods, m) != p.methods.end(); }

}  // namespace

TrialResult blobs_trial(const BlobsProtocol& protocol, double epsilon, std::uint64_t seed) {
  if (protocol.grid.empty() && (wants(protocol, Method::max_mmd) || wants(protocol, Method::max_t) ||
                                wants(protocol, Method::max_power) || wants(protocol, Method::best))) {
    throw std::invalid_argument("grid methods need a non-empty grid");
  }
  const SamplePair data = blobs_generate({epsilon, 5, 10.0, 2 * protocol.m, seed});
  const TrainTestSplit split = split_train_test(data.x, data.y, 0.5, seed);

  SelectionOptions sel;
  sel.alpha = protocol.alpha;
  sel.permutations = protocol.selection_permutations;
  sel.seed = seed;
  sel.threads = protocol.threads;
  sel.floor = protocol.floor;

  std::vector<CandidateScore> scores;
  const bool grid_methods =
      wants(protocol, Method::max_mmd) || wants(protocol, Method::max_t) || wants(protocol, Method::max_power);
  if (grid_methods) {
    const Criterion scoring = wants(protocol, Method::max_power) ? Criterion::max_power : Criterion::max_t;
    scores = grid_select(split.x_train, split.y_train, protocol.grid, scoring, sel).candidates;
  }

  // Methods that land on the same bandwidth share one test (same permutation seed).
  std::map<double, TestResult> tested;
  auto test_at = [&](const KernelSpec& spec) -> const TestResult& {
    auto it = tested.find(spec.log_bandwidth);
    if (it == tested.end()) {
      it = tested
               .emplace(spec.log_bandwidth, two_sample_test(split.x_test, split.y_test, spec, protocol.alpha,
                                                            protocol.permutations, seed, protocol.threads))
               .first;
    }
    return it->second;
  };

  TrialResult out;
  if (wants(protocol, Method::best)) {
    out.grid_rejects.reserve(protocol.grid.size());
    for (const KernelSpec& spec : protocol.grid) out.grid_rejects.push_back(test_at(spec).reject ? 1 : 0);
  }
  for (Method m : protocol.methods) {
    if (m == Method::best) continue;
    KernelSpec spec;
    if (m == Method::median) {
      spec = KernelSpec::rbf(median_heuristic(split.x_train, split.y_train, kDefaultMedianCap, seed));
    } else {
      spec = scores[argmax_candidate(scores, criterion_for(m))].spec;
    }
    const TestResult& r = test_at(spec);
    out.outcomes.push_back({m, spec.bandwidth(), r.reject, r.p_value});
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t rep) {
  RandomStream rng(seed, StreamTag::generic, rep);
  return rng();
}

PowerCurve power_curve(const BlobsProtocol& protocol, std::span<const double> epsilons, std::size_t reps,
                       std::uint64_t seed, const TrialCallback& on_trial) {
  if (reps == 0) throw std::invalid_argument("power curve needs at least one repetition");
  if (protocol.methods.empty()) throw std::invalid_argument("power curve needs at least one method");
  PowerCurve curve;
  const double n = static_cast<double>(reps);
  for (double eps : epsilons) {
    std::map<Method, std::size_t> rejections;
    std::vector<std::size_t> grid_counts(protocol.grid.size(), 0);
    for (std::size_t r = 0; r < reps; ++r) {
      const TrialResult t = blobs_trial(protocol, eps, trial_seed(seed, r));
      for (const MethodOutcome& o : t.outcomes) {
        rejections[o.method] += o.reject ? 1 : 0;
        curve.choices.push_back({eps, r, o.method, o.bandwidth, o.reject});
      }
      for (std::size_t g = 0; g < t.grid_rejects.size(); ++g) grid_counts[g] += t.grid_rejects[g];
      if (on_trial) on_trial(eps, r);
    }
    for (Method m : protocol.methods) {
      PowerCurveRow row;
      row.epsilon = eps;
      row.method = m;
      row.reps = reps;
      if (m == Method::best) {
        const auto it = std::ranges::max_element(grid_counts);  // first maximum: smallest bandwidth
        row.rejection_rate = static_cast<double>(*it) / n;
        row.bandwidth = protocol.grid[static_cast<std::size_t>(it - grid_counts.begin())].bandwidth();
      } else {
        row.rejection_rate = static_cast<double>(rejections[m]) / n;
      }
      row.stderr_ = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / n);
      curve.rows.push_back(row);
    }
  }
  return curve;
}

}  // namespace mmdopt
