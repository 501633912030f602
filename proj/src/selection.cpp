#include "mmdopt/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mmdopt/error.hpp"
#include "mmdopt/nulldist.hpp"
#include "mmdopt/rng.hpp"

namespace mmdopt {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::max_mmd:
      return "max-mmd";
    case Criterion::max_t:
      return "max-t";
    case Criterion::max_power:
      return "max-power";
    case Criterion::median:
      return "median";
  }
  return "unknown";
}

Criterion parse_criterion(std::string_view name) {
  for (Criterion c : {Criterion::max_mmd, Criterion::max_t, Criterion::max_power, Criterion::median}) {
    if (name == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

double median_heuristic(const Dataset& x, const Dataset& y, std::size_t cap, std::uint64_t seed) {
  if (x.rows() && y.rows() && x.cols() != y.cols()) throw DataError("X and Y have different dimensions");
  Dataset pooled = x.stacked(y);
  if (pooled.rows() < 2) throw DataError("median heuristic needs at least 2 pooled points");
  if (cap < 2) throw std::invalid_argument("median heuristic cap must be at least 2");
  if (pooled.rows() > cap) {
    std::vector<std::size_t> idx(pooled.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomStream rng(seed, StreamTag::subsample);
    // Partial Fisher-Yates: the first `cap` slots form a uniform subsample.
    for (std::size_t i = 0; i < cap; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    pooled = pooled.select_rows(idx);
  }
  const std::size_t n = pooled.rows();
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = pooled.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = pooled.row(j);
      double s = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
      dists.push_back(std::sqrt(s));
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  const double upper = dists[mid];
  if (dists.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<KernelSpec> bandwidth_grid(double center, std::size_t count, double factor) {
  if (!(center > 0.0) || !(factor >= 1.0) || count == 0) throw std::invalid_argument("invalid bandwidth grid");
  std::vector<KernelSpec> grid;
  grid.reserve(count);
  const double lo = std::log(center) - std::log(factor);
  const double step = count > 1 ? 2.0 * std::log(factor) / static_cast<double>(count - 1) : 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    KernelSpec spec;
    spec.log_bandwidth = count > 1 ? lo + step * static_cast<double>(i) : std::log(center);
    grid.push_back(spec);
  }
  return grid;
}

double criterion_value(const CandidateScore& c, Criterion criterion) {
  switch (criterion) {
    case Criterion::max_mmd:
      return c.mmd2;
    case Criterion::max_t:
    case Criterion::median:
      return c.t_stat;
    case Criterion::max_power:
      return c.power_estimate;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::size_t argmax_candidate(std::span<const CandidateScore> candidates, Criterion criterion) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = criterion_value(candidates[i], criterion);
    if (std::isnan(v)) continue;
    if (!have || v > best_value ||
        (v == best_value && candidates[i].spec.log_bandwidth < candidates[best].spec.log_bandwidth)) {
      best = i;
      best_value = v;
      have = true;
    }
  }
  return best;
}

namespace {

CandidateScore score_candidate(const Dataset& x, const Dataset& y, const KernelSpec& spec, Criterion criterion,
                               const SelectionOptions& opt) {
  CandidateScore c;
  c.spec = spec;
  c.power_estimate = std::numeric_limits<double>::quiet_NaN();
  if (criterion == Criterion::max_power) {
    const JointGram joint = joint_gram(spec, x, y);
    const EstimatorOutput est = estimate(bundle_from_joint(joint), opt.floor);
    c.mmd2 = est.mmd2;
    c.variance = est.variance;
    c.t_stat = est.t_stat;
    const NullSamples null = sample_null_optimized(joint, opt.permutations, opt.seed, opt.threads);
    const double m = static_cast<double>(joint.m);
    const double c_alpha = m * threshold(null, opt.alpha);
    c.power_estimate = estimate_power(c.mmd2, std::max(c.variance, opt.floor), c_alpha, joint.m);
  } else {
    const EstimatorOutput est = estimate(gram_bundle(spec, x, y), opt.floor);
    c.mmd2 = est.mmd2;
    c.variance = est.variance;
    c.t_stat = est.t_stat;
  }
  return c;
}

}  // namespace

SelectionReport grid_select(const Dataset& x, const Dataset& y, std::span<const KernelSpec> candidates,
                            Criterion criterion, const SelectionOptions& options) {
  if (candidates.empty()) throw std::invalid_argument("grid_select needs at least one candidate");
  if (criterion == Criterion::median) throw std::invalid_argument("use median_select for the median heuristic");
  SelectionReport report;
  report.criterion = criterion;
  report.split_seed = options.seed;
  report.candidates.reserve(candidates.size());
  for (const KernelSpec& spec : candidates) {
    report.candidates.push_back(score_candidate(x, y, spec, criterion, options));
  }
  report.chosen = argmax_candidate(report.candidates, criterion);
  return report;
}

SelectionReport median_select(const Dataset& x, const Dataset& y, const SelectionOptions& options) {
  const KernelSpec spec = KernelSpec::rbf(median_heuristic(x, y, kDefaultMedianCap, options.seed));
  SelectionReport report;
  report.criterion = Criterion::median;
  report.split_seed = options.seed;
  report.candidates.push_back(score_candidate(x, y, spec, Criterion::median, options));
  report.chosen = 0;
  return report;
}

TrainTestSplit split_train_test(const Dataset& x, const Dataset& y, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
  if (x.rows() != y.rows()) throw DataError("X and Y must have the same number of rows to split");
  const std::size_t m = x.rows();
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (n_train < 4 || m - n_train < 4) throw DataError("train/test split leaves fewer than 4 rows in a half");

  TrainTestSplit s;
  auto split_one = [&](StreamTag tag, std::uint64_t index, std::vector<std::size_t>& train,
                       std::vector<std::size_t>& test) {
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RandomStream rng(seed, tag, index);
    shuffle(std::span<std::size_t>(perm), rng);
    train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::ranges::sort(train);
    std::ranges::sort(test);
  };
  split_one(StreamTag::split, 0, s.x_train_index, s.x_test_index);
  split_one(StreamTag::split, 1, s.y_train_index, s.y_test_index);
  s.x_train = x.select_rows(s.x_train_index);
  s.x_test = x.select_rows(s.x_test_index);
  s.y_train = y.select_rows(s.y_train_index);
  s.y_test = y.select_rows(s.y_test_index);
  return s;
}

GramSensitivity t_stat_sensitivity(const GramBundle& g, double floor) {
  const GramContractions c = contract(g);
  GramSensitivity out;
  out.value = estimate(c, floor);
  const std::size_t m = g.m;
  const double md = static_cast<double>(m);
  const double m1 = md - 1.0;
  const double m2 = md * md, m3 = m2 * md, m5 = m3 * m2;

  const double v_eff = std::max(out.value.variance, floor);
  const double dt_dmmd = 1.0 / std::sqrt(v_eff);
  // Below the floor the denominator is constant.
  const double dt_dvar = out.value.variance > floor ? -0.5 * out.value.mmd2 / (v_eff * std::sqrt(v_eff)) : 0.0;

  // Coefficients of the variance estimate in the contractions.
  const double a = 2.0 / (m2 * m1 * m1);
  const double b = (4.0 * md - 6.0) / (m3 * m1 * m1 * m1);
  const double cc = 4.0 * (md - 2.0) / (m3 * m1 * m1);
  const double d = 4.0 * (md - 3.0) / (m3 * m1 * m1);
  const double e = (8.0 * md - 12.0) / (m5 * m1);
  const double f = 8.0 / (m3 * m1);

  const double dv_rowsq_xx = 2.0 * a, dv_fro_xx = -a;
  const double dv_sum_xx = -2.0 * b * c.sum_kxx + f * c.sum_kxy / md;
  const double dv_sum_yy = -2.0 * b * c.sum_kyy + f * c.sum_kxy / md;
  const double dv_rowsq_xy = cc, dv_fro_xy = -d;
  const double dv_sum_xy = -2.0 * e * c.sum_kxy + f * (c.sum_kxx + c.sum_kyy) / md;
  const double dv_cross = -f;  // for both e'Ktxx Kxy e and e'Ktyy Kxy' e
  const double dmmd_self = 1.0 / (md * m1);
  const double dmmd_cross = -2.0 / (md * m1);

  std::vector<double> rx(m, 0.0), ry(m, 0.0), bx(m, 0.0), cy(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      rx[i] += g.ktxx(i, j);
      ry[i] += g.ktyy(i, j);
      bx[i] += g.kxy(i, j);
      cy[j] += g.kxy(i, j);
    }
  }

  out.ktxx = Matrix(m, m);
  out.ktyy = Matrix(m, m);
  out.kxy = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) {
        const double dvxx = dv_rowsq_xx * 2.0 * rx[i] + dv_fro_xx * 2.0 * g.ktxx(i, j) + dv_sum_xx + dv_cross * bx[j];
        const double dvyy = dv_rowsq_xx * 2.0 * ry[i] + dv_fro_xx * 2.0 * g.ktyy(i, j) + dv_sum_yy + dv_cross * cy[j];
        out.ktxx(i, j) = dt_dmmd * dmmd_self + dt_dvar * dvxx;
        out.ktyy(i, j) = dt_dmmd * dmmd_self + dt_dvar * dvyy;
      }
      const double dvxy = dv_rowsq_xy * 2.0 * (bx[i] + cy[j]) + dv_fro_xy * 2.0 * g.kxy(i, j) + dv_sum_xy +
                          dv_cross * (rx[i] + ry[j]);
      out.kxy(i, j) = dt_dmmd * (i == j ? 0.0 : dmmd_cross) + dt_dvar * dvxy;
    }
  }
  return out;
}

TStatGradient t_stat_gradient(const KernelSpec& spec, const Dataset& x, const Dataset& y, double floor) {
  check_pair(spec, x, y);
  const GramBundle g = gram_bundle(spec, x, y);
  const GramSensitivity sens = t_stat_sensitivity(g, floor);
  const KernelEvaluator k(spec, x.cols());
  const std::size_t m = g.m;
  const std::size_t dims = x.cols();
  const bool ard = spec.kind == KernelKind::ard_rbf;
  const double inv_sigma_sq = 1.0 / (k.bandwidth() * k.bandwidth());
  const auto sq_w = k.squared_weights();

  TStatGradient out;
  out.value = sens.value;
  out.gradient.assign(spec.parameter_count(), 0.0);
  std::vector<double> per_dim(dims, 0.0);

  // dk/dlog(sigma) = k s / sigma^2 ; dk/dlog(w_d) = -k w_d^2 diff_d^2 / sigma^2
  auto accumulate = [&](const double* a, const double* b, double sensitivity, double kv) {
    const double h = sensitivity * kv * inv_sigma_sq;
    if (h == 0.0) return;
    double s = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = a[d] - b[d];
      const double term = sq_w[d] * diff * diff;
      s += term;
      if (ard) per_dim[d] += h * term;
    }
    out.gradient[0] += h * s;
  };

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      accumulate(x.row(i).data(), y.row(j).data(), sens.kxy(i, j), g.kxy(i, j));
      if (j > i) {
        // Symmetric entries share one derivative.
        accumulate(x.row(i).data(), x.row(j).data(), sens.ktxx(i, j) + sens.ktxx(j, i), g.ktxx(i, j));
        accumulate(y.row(i).data(), y.row(j).data(), sens.ktyy(i, j) + sens.ktyy(j, i), g.ktyy(i, j));
      }
    }
  }
  for (std::size_t d = 0; d < dims && ard; ++d) out.gradient[d + 1] = -per_dim[d];
  return out;
}

TrainResult train_ard(const Dataset& x_train, const Dataset& y_train, const KernelSpec& init, const TrainConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("learning rate must be non-negative");
  }
  if (!(cfg.floor > 0.0)) throw std::invalid_argument("variance floor must be positive");
  if (x_train.cols() != y_train.cols()) throw DataError("X and Y have different dimensions");
  init.validate(x_train.cols());
  const std::size_t mx = x_train.rows();
  const std::size_t my = y_train.rows();
  if (cfg.batch_size < 4 || cfg.batch_size > std::min(mx, my)) {
    throw std::invalid_argument("batch size must lie in [4, min(training sizes)]");
  }

  TrainResult result{init, {}};
  result.trace.reserve(cfg.iterations);
  std::vector<double> params = init.parameters();
  std::vector<double> mom1(params.size(), 0.0), mom2(params.size(), 0.0);
  std::vector<std::size_t> pool_x(mx), pool_y(my);

  auto draw = [&](std::vector<std::size_t>& pool, std::uint64_t stream) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    RandomStream rng(cfg.seed, StreamTag::minibatch, stream);
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    return std::vector<std::size_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.batch_size));
  };

  double decay1 = 1.0, decay2 = 1.0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    // Equal-sized samples share one index draw, so identical X and Y give
    // identical batches.
    const auto idx_x = draw(pool_x, 2 * static_cast<std::uint64_t>(it));
    const auto idx_y = mx == my ? idx_x : draw(pool_y, 2 * static_cast<std::uint64_t>(it) + 1);
    const Dataset bx = x_train.select_rows(idx_x);
    const Dataset by = y_train.select_rows(idx_y);

    const TStatGradient tg = t_stat_gradient(result.spec, bx, by, cfg.floor);
    result.trace.push_back(tg.value.t_stat);

    decay1 *= cfg.beta1;
    decay2 *= cfg.beta2;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double grad = tg.gradient[p];
      mom1[p] = cfg.beta1 * mom1[p] + (1.0 - cfg.beta1) * grad;
      mom2[p] = cfg.beta2 * mom2[p] + (1.0 - cfg.beta2) * grad * grad;
      const double m_hat = mom1[p] / (1.0 - decay1);
      const double v_hat = mom2[p] / (1.0 - decay2);
      params[p] += cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
    result.spec.set_parameters(params);
  }
  return result;
}

}  // namespace mmdopt
