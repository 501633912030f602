#pragma once

#include <cstddef>

#include "mmdopt/fixed_point.hpp"
#include "mmdopt/kernels.hpp"

namespace mmdopt {

inline constexpr double kDefaultVarianceFloor = 1e-8;

/// Scalar contractions of a GramBundle from which the unbiased MMD^2 and
/// its variance estimate are assembled. `e` denotes the all-ones vector.
/// Contractions are accumulated in extended precision.
using Accum = long double;

struct GramContractions {
  std::size_t m = 0;
  Accum sum_kxx = 0;      // e' Ktxx e
  Accum sum_kyy = 0;      // e' Ktyy e
  Accum sum_kxy = 0;      // e' Kxy e
  Accum trace_kxy = 0;    // tr Kxy
  Accum rowsq_kxx = 0;    // ||Ktxx e||^2
  Accum rowsq_kyy = 0;    // ||Ktyy e||^2
  Accum fro_kxx = 0;      // ||Ktxx||_F^2
  Accum fro_kyy = 0;      // ||Ktyy||_F^2
  Accum rowsq_kxy = 0;    // ||Kxy e||^2
  Accum colsq_kxy = 0;    // ||Kxy' e||^2
  Accum fro_kxy = 0;      // ||Kxy||_F^2
  Accum kxx_kxy = 0;      // e' Ktxx Kxy e
  Accum kyy_kyx = 0;      // e' Ktyy Kxy' e
  FixedTotal mmd_numerator = 0;  // m(m-1) * MMD^2_u in fixed point
};

GramContractions contract(const GramBundle& g);

/// Unbiased MMD^2 from the numerator held in fixed point.
double mmd2_from_numerator(FixedTotal numerator, std::size_t m);

/// Unbiased quadratic-time MMD^2 (U-statistic over ordered pairs i != j).
/// Requires m >= 2.
double mmd2_u(const GramBundle& g);

/// Unbiased estimate of the variance of mmd2_u under the alternative.
/// May be negative. Requires m >= 4.
double variance_hat(const GramBundle& g);
double variance_hat(const GramContractions& c);

/// MMD^2_u / sqrt(max(variance_hat, floor)).
double t_statistic(const GramBundle& g, double floor = kDefaultVarianceFloor);

struct EstimatorOutput {
  double mmd2 = 0;
  double variance = 0;
  double t_stat = 0;
  std::size_t m = 0;
};

EstimatorOutput estimate(const GramBundle& g, double floor = kDefaultVarianceFloor);
EstimatorOutput estimate(const GramContractions& c, double floor = kDefaultVarianceFloor);

/// Standard normal CDF.
double normal_cdf(double x);

/// Asymptotic power Phi(mmd2/sqrt(V) - c_alpha/(m sqrt(V))), with c_alpha on
/// the m * MMD^2 scale. Throws NumericalError if variance <= 0.
double estimate_power(double mmd2, double variance, double c_alpha, std::size_t m);

}  // namespace mmdopt
