#include "mmdopt/estimators.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmdopt/error.hpp"

namespace mmdopt {

namespace {

// Pairwise summation in extended precision: the variance formula cancels
// terms several orders of magnitude larger than its result.
template <class T>
Accum pairwise_sum(std::span<const T> v) {
  constexpr std::size_t kLeaf = 128;
  if (v.size() <= kLeaf) {
    Accum s = 0;
    for (T x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

template <class T>
Accum dot(std::span<const T> a, std::span<const T> b) {
  std::vector<Accum> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = Accum(a[i]) * Accum(b[i]);
  return pairwise_sum(std::span<const Accum>(prod));
}

}  // namespace

GramContractions contract(const GramBundle& g) {
  const std::size_t m = g.m;
  if (m < 2) throw NumericalError("MMD estimate needs at least 2 samples per side");

  GramContractions c;
  c.m = m;
  std::vector<Accum> row_kxx(m), row_kyy(m), row_kxy(m), col_kxy(m, 0.0L);
  std::vector<Accum> fro_xx(m), fro_yy(m), fro_xy(m), scratch(m);
  FixedTotal fixed_xx = 0, fixed_yy = 0, fixed_xy = 0, fixed_trace = 0;

  for (std::size_t i = 0; i < m; ++i) {
    const auto rxx = g.ktxx.row(i);
    const auto ryy = g.ktyy.row(i);
    const auto rxy = g.kxy.row(i);
    row_kxx[i] = pairwise_sum(rxx);
    row_kyy[i] = pairwise_sum(ryy);
    row_kxy[i] = pairwise_sum(rxy);
    fro_xx[i] = dot(rxx, rxx);
    fro_yy[i] = dot(ryy, ryy);
    fro_xy[i] = dot(rxy, rxy);
    for (std::size_t j = 0; j < m; ++j) col_kxy[j] += rxy[j];
    fixed_xx += fixed_sum(rxx.data(), m);
    fixed_yy += fixed_sum(ryy.data(), m);
    fixed_xy += fixed_sum(rxy.data(), m);
    fixed_trace += to_fixed(rxy[i]);
  }

  c.sum_kxx = pairwise_sum<Accum>(row_kxx);
  c.sum_kyy = pairwise_sum<Accum>(row_kyy);
  c.sum_kxy = pairwise_sum<Accum>(row_kxy);
  for (std::size_t i = 0; i < m; ++i) scratch[i] = g.kxy(i, i);
  c.trace_kxy = pairwise_sum<Accum>(scratch);
  c.rowsq_kxx = dot<Accum>(row_kxx, row_kxx);
  c.rowsq_kyy = dot<Accum>(row_kyy, row_kyy);
  c.rowsq_kxy = dot<Accum>(row_kxy, row_kxy);
  c.colsq_kxy = dot<Accum>(col_kxy, col_kxy);
  c.fro_kxx = pairwise_sum<Accum>(fro_xx);
  c.fro_kyy = pairwise_sum<Accum>(fro_yy);
  c.fro_kxy = pairwise_sum<Accum>(fro_xy);
  // Ktxx and Ktyy are symmetric, so e' Ktxx = (Ktxx e)'.
  c.kxx_kxy = dot<Accum>(row_kxx, row_kxy);
  c.kyy_kyx = dot<Accum>(row_kyy, col_kxy);
  c.mmd_numerator = fixed_xx + fixed_yy - 2 * (fixed_xy - fixed_trace);
  return c;
}

double mmd2_from_numerator(FixedTotal numerator, std::size_t m) {
  const double mm = static_cast<double>(m);
  return from_fixed(numerator) / (mm * (mm - 1.0));
}

double mmd2_u(const GramBundle& g) {
  const std::size_t m = g.m;
  if (m < 2) throw NumericalError("MMD estimate needs at least 2 samples per side");
  FixedTotal numerator = 0;
  for (std::size_t i = 0; i < m; ++i) {
    numerator += fixed_sum(g.ktxx.row(i).data(), m) + fixed_sum(g.ktyy.row(i).data(), m) -
                 2 * (fixed_sum(g.kxy.row(i).data(), m) - to_fixed(g.kxy(i, i)));
  }
  return mmd2_from_numerator(numerator, m);
}

double variance_hat(const GramContractions& c) {
  if (c.m < 4) throw NumericalError("variance estimate needs at least 4 samples per side");
  // Every term is scaled by m^5 (m-1)^3 so the coefficients are integers and
  // a single division happens at the end; constant kernels then cancel exactly.
  const Accum m = static_cast<Accum>(c.m);
  const Accum m1 = m - 1;
  const Accum m2 = m * m, m1_2 = m1 * m1;

  const Accum first = 2 * m2 * m * m1 * (2 * c.rowsq_kxx - c.fro_kxx + 2 * c.rowsq_kyy - c.fro_kyy);
  const Accum second = (4 * m - 6) * m2 * (c.sum_kxx * c.sum_kxx + c.sum_kyy * c.sum_kyy);
  const Accum third = 4 * (m - 2) * m2 * m1 * (c.rowsq_kxy + c.colsq_kxy);
  const Accum fourth = 4 * (m - 3) * m2 * m1 * c.fro_kxy;
  const Accum fifth = (8 * m - 12) * m1_2 * c.sum_kxy * c.sum_kxy;
  const Accum sixth = 8 * m * m1_2 * ((c.sum_kxx + c.sum_kyy) * c.sum_kxy - m * (c.kxx_kxy + c.kyy_kyx));
  const Accum scale = m2 * m2 * m * m1_2 * m1;
  return static_cast<double>((first - second + third - fourth - fifth + sixth) / scale);
}

double variance_hat(const GramBundle& g) {
  if (g.m < 4) throw NumericalError("variance estimate needs at least 4 samples per side");
  return variance_hat(contract(g));
}

EstimatorOutput estimate(const GramContractions& c, double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("variance floor must be positive");
  EstimatorOutput out;
  out.m = c.m;
  out.mmd2 = mmd2_from_numerator(c.mmd_numerator, c.m);
  out.variance = variance_hat(c);
  out.t_stat = out.mmd2 / std::sqrt(std::max(out.variance, floor));
  return out;
}

EstimatorOutput estimate(const GramBundle& g, double floor) {
  if (g.m < 4) throw NumericalError("variance estimate needs at least 4 samples per side");
  return estimate(contract(g), floor);
}

double t_statistic(const GramBundle& g, double floor) { return estimate(g, floor).t_stat; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double estimate_power(double mmd2, double variance, double c_alpha, std::size_t m) {
  if (!(variance > 0.0)) throw NumericalError("power estimate needs a positive variance");
  if (m < 1) throw std::invalid_argument("sample size must be positive");
  const double sd = std::sqrt(variance);
  return normal_cdf(mmd2 / sd - c_alpha / (static_cast<double>(m) * sd));
}

}  // namespace mmdopt
