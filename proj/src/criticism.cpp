#include "mmdopt/criticism.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mmdopt/error.hpp"

namespace mmdopt {

std::vector<double> witness(const KernelSpec& spec, const Dataset& x, const Dataset& y, const Dataset& probes) {
  if (x.rows() == 0 || y.rows() == 0) throw DataError("witness needs non-empty X and Y");
  if (x.cols() != y.cols() || probes.cols() != x.cols()) throw DataError("witness inputs have mismatched dimensions");
  const KernelEvaluator k(spec, x.cols());
  const double inv_m = 1.0 / static_cast<double>(x.rows());
  const double inv_n = 1.0 / static_cast<double>(y.rows());
  auto mean_embedding = [&](const Dataset& s, const double* t, double inv) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) acc += k(s.row(i).data(), t);
    return acc * inv;
  };
  std::vector<double> out(probes.rows());
  for (std::size_t p = 0; p < probes.rows(); ++p) {
    const double* t = probes.row(p).data();
    out[p] = mean_embedding(x, t, inv_m) - mean_embedding(y, t, inv_n);
  }
  return out;
}

Extremes extremes(std::span<const double> values, std::size_t k) {
  if (k > values.size()) throw std::invalid_argument("requested more extremes than there are values");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Extremes out;
  out.top_positive = order;
  std::partial_sort(out.top_positive.begin(), out.top_positive.begin() + static_cast<std::ptrdiff_t>(k),
                    out.top_positive.end(), [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  out.top_positive.resize(k);
  out.top_negative = std::move(order);
  std::partial_sort(out.top_negative.begin(), out.top_negative.begin() + static_cast<std::ptrdiff_t>(k),
                    out.top_negative.end(), [&](std::size_t a, std::size_t b) {
                      return values[a] < values[b] || (values[a] == values[b] && a < b);
                    });
  out.top_negative.resize(k);
  return out;
}

WitnessReport witness_report(const KernelSpec& spec, const Dataset& x, const Dataset& y, const Dataset& probes,
                             std::size_t k, std::span<const int> labels) {
  WitnessReport r;
  r.values = witness(spec, x, y, probes);
  auto ex = extremes(r.values, k);
  r.top_positive = std::move(ex.top_positive);
  r.top_negative = std::move(ex.top_negative);
  if (!labels.empty()) {
    if (labels.size() != r.values.size()) throw DataError("probe label count does not match probe count");
    double sum[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0 && labels[i] != 1) throw DataError("probe labels must be 0 or 1");
      sum[labels[i]] += r.values[i];
      ++count[labels[i]];
    }
    if (count[0] && count[1]) {
      r.mean_gap = sum[0] / static_cast<double>(count[0]) - sum[1] / static_cast<double>(count[1]);
    }
  }
  return r;
}

}  // namespace mmdopt
