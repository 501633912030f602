#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmdopt/matrix.hpp"

namespace mmdopt {

enum class KernelKind { rbf, ard_rbf };

/// Gaussian RBF kernel k(x, y) = exp(-sum_d w_d^2 (x_d - y_d)^2 / (2 sigma^2)),
/// optionally with per-dimension ARD weights. Parameters are stored as logs
/// so that gradient steps never leave the valid region. A weight of exactly
/// zero is represented by log_weight = -inf.
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double log_bandwidth = 0.0;
  std::vector<double> log_weights;  // empty unless kind == ard_rbf

  static KernelSpec rbf(double bandwidth);
  static KernelSpec ard(double bandwidth, std::span<const double> weights);
  /// ARD spec with all weights 1 over `dims` dimensions, same bandwidth.
  static KernelSpec ard_from(const KernelSpec& spec, std::size_t dims);

  double bandwidth() const;
  std::vector<double> weights() const;
  /// log_bandwidth followed by log_weights.
  std::size_t parameter_count() const { return 1 + log_weights.size(); }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);

  /// Throws std::invalid_argument if the parameters are not usable, or
  /// DataError if `dims` does not match the weight count.
  void validate() const;
  void validate(std::size_t dims) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Kernel parameters decoded for evaluation.
class KernelEvaluator {
 public:
  KernelEvaluator(const KernelSpec& spec, std::size_t dims);

  /// Weighted squared distance sum_d w_d^2 (x_d - y_d)^2.
  double weighted_sq_dist(const double* x, const double* y) const noexcept;
  double operator()(const double* x, const double* y) const noexcept;
  double operator()(std::span<const double> x, std::span<const double> y) const noexcept {
    return (*this)(x.data(), y.data());
  }

  std::size_t dims() const noexcept { return dims_; }
  double bandwidth() const noexcept { return sigma_; }
  std::span<const double> squared_weights() const noexcept { return sq_weights_; }
  bool ard() const noexcept { return ard_; }

 private:
  std::size_t dims_;
  bool ard_;
  double sigma_;
  double neg_inv_two_sigma_sq_;
  std::vector<double> sq_weights_;
};

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Kernel sub-matrices for one (X, Y) pair of equal size m.
struct GramBundle {
  Matrix kxy;   // k(X_i, Y_j)
  Matrix ktxx;  // k(X_i, X_j), zero diagonal
  Matrix ktyy;  // k(Y_i, Y_j), zero diagonal
  std::size_t m = 0;

  /// Wraps precomputed matrices (square, same size, m >= 2). The diagonals
  /// of ktxx and ktyy are zeroed. Throws DataError on shape problems.
  static GramBundle from_matrices(Matrix kxy, Matrix kxx, Matrix kyy);
};

/// Kernel matrix over the pooled sample Z = [X; Y], size 2m x 2m.
struct JointGram {
  Matrix k;
  std::size_t m = 0;

  std::size_t pooled() const noexcept { return 2 * m; }
};

GramBundle gram_bundle(const KernelSpec& spec, const Dataset& x, const Dataset& y);
JointGram joint_gram(const KernelSpec& spec, const Dataset& x, const Dataset& y);

/// The GramBundle blocks of a joint Gram (bit-identical to gram_bundle on
/// the same data).
GramBundle bundle_from_joint(const JointGram& joint);

/// Derivatives of the three GramBundle matrices with respect to one
/// log-parameter.
struct GramGradient {
  Matrix kxy;
  Matrix ktxx;
  Matrix ktyy;
};

/// One entry per parameter, ordered as KernelSpec::parameters().
std::vector<GramGradient> gram_gradients(const KernelSpec& spec, const Dataset& x, const Dataset& y);

/// Checks shared by the Gram builders: equal row counts m >= 2, equal
/// dimension, dimension consistent with spec. Throws DataError.
void check_pair(const KernelSpec& spec, const Dataset& x, const Dataset& y);

}  // namespace mmdopt
