#include "mmdopt/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mmdopt/error.hpp"
#include "mmdopt/fixed_point.hpp"

namespace mmdopt {

KernelSpec KernelSpec::rbf(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("bandwidth must be positive and finite");
  }
  return KernelSpec{KernelKind::rbf, std::log(bandwidth), {}};
}

KernelSpec KernelSpec::ard(double bandwidth, std::span<const double> weights) {
  KernelSpec spec = rbf(bandwidth);
  spec.kind = KernelKind::ard_rbf;
  spec.log_weights.reserve(weights.size());
  for (double w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("ARD weights must be finite");
    // Weights enter squared, so only |w| matters.
    spec.log_weights.push_back(std::log(std::abs(w)));
  }
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::ard_from(const KernelSpec& spec, std::size_t dims) {
  if (spec.kind == KernelKind::ard_rbf) {
    spec.validate(dims);
    return spec;
  }
  return KernelSpec{KernelKind::ard_rbf, spec.log_bandwidth, std::vector<double>(dims, 0.0)};
}

double KernelSpec::bandwidth() const { return std::exp(log_bandwidth); }

std::vector<double> KernelSpec::weights() const {
  std::vector<double> w;
  w.reserve(log_weights.size());
  for (double lw : log_weights) w.push_back(std::exp(lw));
  return w;
}

std::vector<double> KernelSpec::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  p.push_back(log_bandwidth);
  p.insert(p.end(), log_weights.begin(), log_weights.end());
  return p;
}

void KernelSpec::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  log_bandwidth = params[0];
  for (std::size_t i = 0; i < log_weights.size(); ++i) log_weights[i] = params[i + 1];
}

void KernelSpec::validate() const {
  const double sigma = bandwidth();
  if (!std::isfinite(log_bandwidth) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  }
  if (kind == KernelKind::rbf && !log_weights.empty()) {
    throw std::invalid_argument("plain RBF kernel cannot carry ARD weights");
  }
  for (double lw : log_weights) {
    if (std::isnan(lw) || !std::isfinite(std::exp(lw))) {
      throw std::invalid_argument("ARD log-weights must decode to finite values");
    }
  }
}

void KernelSpec::validate(std::size_t dims) const {
  validate();
  if (kind == KernelKind::ard_rbf && log_weights.size() != dims) {
    throw DataError("ARD kernel has " + std::to_string(log_weights.size()) +
                    " weights but data has dimension " + std::to_string(dims));
  }
}

KernelEvaluator::KernelEvaluator(const KernelSpec& spec, std::size_t dims)
    : dims_(dims), ard_(spec.kind == KernelKind::ard_rbf) {
  spec.validate(dims);
  sigma_ = spec.bandwidth();
  neg_inv_two_sigma_sq_ = -1.0 / (2.0 * sigma_ * sigma_);
  sq_weights_.assign(dims, 1.0);
  if (ard_) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double w = std::exp(spec.log_weights[d]);
      sq_weights_[d] = w * w;
    }
  }
}

double KernelEvaluator::weighted_sq_dist(const double* x, const double* y) const noexcept {
  double acc = 0.0;
  for (std::size_t d = 0; d < dims_; ++d) {
    const double diff = x[d] - y[d];
    acc += sq_weights_[d] * (diff * diff);
  }
  return acc;
}

double KernelEvaluator::operator()(const double* x, const double* y) const noexcept {
  // Values below the smallest normal double are flushed to zero; subnormal
  // Gram entries would slow every later pass over the matrix.
  constexpr double kLogMinNormal = -708.39641853226408;
  const double arg = weighted_sq_dist(x, y) * neg_inv_two_sigma_sq_;
  return arg < kLogMinNormal ? 0.0 : std::exp(arg);
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("kernel arguments have different dimensions");
  const KernelEvaluator k(spec, x.size());
  return k(x, y);
}

GramBundle GramBundle::from_matrices(Matrix kxy, Matrix kxx, Matrix kyy) {
  const std::size_t m = kxy.rows();
  for (const Matrix* mat : {&kxy, &kxx, &kyy}) {
    if (mat->rows() != m || mat->cols() != m) throw DataError("Gram matrices must be square and equal-sized");
    for (double v : mat->values()) {
      if (!(std::abs(v) <= kFixedMaxMagnitude)) throw DataError("Gram entry out of supported range");
    }
  }
  if (m < 2) throw DataError("need at least 2 samples per side");
  for (std::size_t i = 0; i < m; ++i) {
    kxx(i, i) = 0.0;
    kyy(i, i) = 0.0;
  }
  return GramBundle{std::move(kxy), std::move(kxx), std::move(kyy), m};
}

void check_pair(const KernelSpec& spec, const Dataset& x, const Dataset& y) {
  if (x.rows() != y.rows()) {
    throw DataError("X and Y must have the same number of rows (" + std::to_string(x.rows()) + " vs " +
                    std::to_string(y.rows()) + ")");
  }
  if (x.rows() < 2) throw DataError("need at least 2 samples per side");
  if (x.cols() != y.cols()) throw DataError("X and Y have different dimensions");
  if (x.cols() == 0) throw DataError("data must have at least one column");
  spec.validate(x.cols());
}

namespace {

// Symmetric Gram with zero diagonal; each off-diagonal entry computed once
// and mirrored.
Matrix self_gram_zero_diag(const KernelEvaluator& k, const Dataset& a) {
  const std::size_t n = a.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = k(ai, a.row(j).data());
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Matrix cross_gram(const KernelEvaluator& k, const Dataset& a, const Dataset& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i).data();
    double* dst = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) dst[j] = k(ai, b.row(j).data());
  }
  return out;
}

}  // namespace

GramBundle gram_bundle(const KernelSpec& spec, const Dataset& x, const Dataset& y) {
  check_pair(spec, x, y);
  const KernelEvaluator k(spec, x.cols());
  return GramBundle{cross_gram(k, x, y), self_gram_zero_diag(k, x), self_gram_zero_diag(k, y), x.rows()};
}

JointGram joint_gram(const KernelSpec& spec, const Dataset& x, const Dataset& y) {
  check_pair(spec, x, y);
  const KernelEvaluator k(spec, x.cols());
  const std::size_t m = x.rows();
  const std::size_t n = 2 * m;
  auto point = [&](std::size_t a) { return a < m ? x.row(a).data() : y.row(a - m).data(); };
  JointGram g{Matrix(n, n), m};
  for (std::size_t a = 0; a < n; ++a) {
    const double* za = point(a);
    g.k(a, a) = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = k(za, point(b));
      g.k(a, b) = v;
      g.k(b, a) = v;
    }
  }
  return g;
}

GramBundle bundle_from_joint(const JointGram& joint) {
  const std::size_t m = joint.m;
  GramBundle g{Matrix(m, m), Matrix(m, m), Matrix(m, m), m};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      g.kxy(i, j) = joint.k(i, m + j);
      g.ktxx(i, j) = i == j ? 0.0 : joint.k(i, j);
      g.ktyy(i, j) = i == j ? 0.0 : joint.k(m + i, m + j);
    }
  }
  return g;
}

std::vector<GramGradient> gram_gradients(const KernelSpec& spec, const Dataset& x, const Dataset& y) {
  check_pair(spec, x, y);
  const KernelEvaluator k(spec, x.cols());
  const std::size_t m = x.rows();
  const std::size_t dims = x.cols();
  const std::size_t params = spec.parameter_count();
  const double inv_sigma_sq = 1.0 / (k.bandwidth() * k.bandwidth());
  const auto sq_w = k.squared_weights();

  std::vector<GramGradient> out(params, GramGradient{Matrix(m, m), Matrix(m, m), Matrix(m, m)});

  // dk/dlog(sigma) = k * s / sigma^2, dk/dlog(w_d) = -k * w_d^2 diff_d^2 / sigma^2
  auto fill = [&](const double* a, const double* b, auto&& store) {
    const double kv = k(a, b);
    const double s = k.weighted_sq_dist(a, b);
    store(0, kv * s * inv_sigma_sq);
    if (spec.kind == KernelKind::ard_rbf) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double diff = a[d] - b[d];
        store(d + 1, -kv * sq_w[d] * diff * diff * inv_sigma_sq);
      }
    }
  };

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      fill(x.row(i).data(), y.row(j).data(), [&](std::size_t p, double v) { out[p].kxy(i, j) = v; });
    }
    for (std::size_t j = i + 1; j < m; ++j) {
      fill(x.row(i).data(), x.row(j).data(), [&](std::size_t p, double v) {
        out[p].ktxx(i, j) = v;
        out[p].ktxx(j, i) = v;
      });
      fill(y.row(i).data(), y.row(j).data(), [&](std::size_t p, double v) {
        out[p].ktyy(i, j) = v;
        out[p].ktyy(j, i) = v;
      });
    }
  }
  return out;
}

}  // namespace mmdopt
