#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mmdopt/error.hpp"
#include "mmdopt/kernels.hpp"
#include "oracles.hpp"

using namespace mmdopt;

namespace {

bool symmetric_exact(const Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) != a(j, i)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("unit") {

TEST_CASE("eval_kernel closed forms") {
  const std::vector<double> p{0.3, -1.2}, q{2.0, 0.5};
  CHECK(eval_kernel(KernelSpec::rbf(0.7), p, p) == 1.0);
  const std::vector<double> zero{0.0}, two{2.0};
  CHECK(eval_kernel(KernelSpec::rbf(1.0), zero, two) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  const std::vector<double> w{1.0, 0.0};
  const std::vector<double> a{0.0, 5.0}, b{1.0, 9.0};
  CHECK(eval_kernel(KernelSpec::ard(1.0, w), a, b) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(eval_kernel(KernelSpec::rbf(1.3), p, q) ==
        doctest::Approx(oracle::kernel(p.data(), q.data(), 2, 1.3)).epsilon(1e-14));
}

TEST_CASE("eval_kernel rejects mismatched dimensions") {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  CHECK_THROWS(eval_kernel(KernelSpec::rbf(1.0), a, b));
  const std::vector<double> w{1.0, 1.0, 1.0};
  CHECK_THROWS(eval_kernel(KernelSpec::ard(1.0, w), a, a));
}

TEST_CASE("kernel specs validate their parameters") {
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::rbf(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::rbf(std::numeric_limits<double>::infinity()), std::invalid_argument);
  const KernelSpec s = KernelSpec::rbf(2.5);
  CHECK(s.bandwidth() == doctest::Approx(2.5));
  CHECK(s.parameter_count() == 1);
  const std::vector<double> w{2.0, 0.5};
  const KernelSpec a = KernelSpec::ard(1.5, w);
  CHECK(a.parameter_count() == 3);
  CHECK(a.weights()[0] == doctest::Approx(2.0));
  CHECK(a.weights()[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(a.validate(3), DataError);
}

TEST_CASE("ard with unit weights equals rbf entrywise") {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::normal_matrix(12, 3, rng), y = oracle::normal_matrix(12, 3, rng, 0.5);
  const KernelSpec rbf = KernelSpec::rbf(1.7);
  const KernelSpec ard = KernelSpec::ard_from(rbf, 3);
  const GramBundle a = gram_bundle(rbf, x, y), b = gram_bundle(ard, x, y);
  CHECK(a.kxy == b.kxy);
  CHECK(a.ktxx == b.ktxx);
  CHECK(a.ktyy == b.ktyy);
}

TEST_CASE("kernel values lie in (0, 1] with k(x, x) = 1") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> bw(0.1, 10.0);
  for (int t = 0; t < 200; ++t) {
    const Matrix pts = oracle::normal_matrix(2, 3, rng, 0.0, 2.0);
    const KernelSpec s = KernelSpec::rbf(bw(rng));
    const double k = eval_kernel(s, pts.row(0), pts.row(1));
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
    CHECK(eval_kernel(s, pts.row(0), pts.row(0)) == 1.0);
  }
}

TEST_CASE("gram_bundle matches the elementwise oracle") {
  std::mt19937_64 rng(3);
  const Matrix x = oracle::normal_matrix(9, 2, rng), y = oracle::normal_matrix(9, 2, rng, 1.0);
  const std::vector<double> w{0.7, 1.9};
  for (const KernelSpec& s : {KernelSpec::rbf(0.9), KernelSpec::ard(1.1, w)}) {
    const std::vector<double> ow = s.kind == KernelKind::rbf ? std::vector<double>{} : w;
    const GramBundle g = gram_bundle(s, x, y);
    const Matrix kxy = oracle::gram(x, y, s.bandwidth(), ow);
    const Matrix kxx = oracle::gram(x, x, s.bandwidth(), ow);
    const Matrix kyy = oracle::gram(y, y, s.bandwidth(), ow);
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t j = 0; j < 9; ++j) {
        CHECK(g.kxy(i, j) == doctest::Approx(kxy(i, j)).epsilon(1e-13));
        CHECK(g.ktxx(i, j) == doctest::Approx(i == j ? 0.0 : kxx(i, j)).epsilon(1e-13));
        CHECK(g.ktyy(i, j) == doctest::Approx(i == j ? 0.0 : kyy(i, j)).epsilon(1e-13));
      }
    }
    CHECK(symmetric_exact(g.ktxx));
    CHECK(symmetric_exact(g.ktyy));
  }
}

TEST_CASE("gram_bundle trivial structure") {
  const Matrix x{{0.0, 0.0}, {3.0, 4.0}};
  const Matrix y{{1.0, 1.0}, {4.0, 5.0}};
  const GramBundle g = gram_bundle(KernelSpec::rbf(2.0), x, y);
  CHECK(g.m == 2);
  CHECK(g.ktxx(0, 1) == g.ktyy(0, 1));  // both pairs are 5 apart

  std::mt19937_64 rng(4);
  const Matrix z = oracle::normal_matrix(6, 2, rng);
  const GramBundle same = gram_bundle(KernelSpec::rbf(1.0), z, z);
  CHECK(same.ktxx == same.ktyy);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) CHECK(same.kxy(i, j) == (i == j ? 1.0 : same.ktxx(i, j)));
  }
}

TEST_CASE("gram builders reject bad shapes") {
  const Matrix one{{1.0, 2.0}};
  const Matrix two{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix three{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const Matrix narrow{{1.0}, {2.0}};
  const KernelSpec s = KernelSpec::rbf(1.0);
  CHECK_THROWS_AS(gram_bundle(s, one, one), DataError);
  CHECK_THROWS_AS(gram_bundle(s, two, three), DataError);
  CHECK_THROWS_AS(gram_bundle(s, two, narrow), DataError);
  CHECK_THROWS_AS(joint_gram(s, two, narrow), DataError);
  CHECK_THROWS_AS(gram_gradients(s, one, one), DataError);
}

TEST_CASE("joint_gram blocks and symmetry") {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::normal_matrix(3, 2, rng), y = oracle::normal_matrix(3, 2, rng, 0.5);
  const KernelSpec s = KernelSpec::rbf(0.8);
  const JointGram j = joint_gram(s, x, y);
  REQUIRE(j.k.rows() == 6);
  CHECK(symmetric_exact(j.k));
  const Matrix z = x.stacked(y);
  const Matrix ref = oracle::gram(z, z, 0.8);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) CHECK(j.k(a, b) == doctest::Approx(ref(a, b)).epsilon(1e-13));
  }
  const GramBundle g = gram_bundle(s, x, y);
  const GramBundle from = bundle_from_joint(j);
  CHECK(from.kxy == g.kxy);
  CHECK(from.ktxx == g.ktxx);
  CHECK(from.ktyy == g.ktyy);
}

TEST_CASE("from_matrices zeroes diagonals and checks shapes") {
  const Matrix kxy{{1.0, 2.0}, {3.0, 4.0}};
  const GramBundle g = GramBundle::from_matrices(kxy, {{9.0, 1.0}, {1.0, 9.0}}, {{7.0, 2.0}, {2.0, 7.0}});
  CHECK(g.ktxx(0, 0) == 0.0);
  CHECK(g.ktyy(1, 1) == 0.0);
  CHECK(g.ktxx(0, 1) == 1.0);
  CHECK_THROWS_AS(GramBundle::from_matrices(kxy, Matrix(3, 3), Matrix(2, 2)), DataError);
  CHECK_THROWS_AS(GramBundle::from_matrices(Matrix(1, 1), Matrix(1, 1), Matrix(1, 1)), DataError);
}

TEST_CASE("gram gradients: counts, zero at coincident points, finite differences") {
  std::mt19937_64 rng(6);
  const Matrix x = oracle::normal_matrix(5, 2, rng), y = oracle::normal_matrix(5, 2, rng, 0.7);
  CHECK(gram_gradients(KernelSpec::rbf(1.0), x, y).size() == 1);

  const auto same = gram_gradients(KernelSpec::rbf(1.0), x, x);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same[0].kxy(i, i) == 0.0);

  const std::vector<double> w{0.8, 1.4};
  for (const KernelSpec& base : {KernelSpec::rbf(1.2), KernelSpec::ard(0.9, w)}) {
    const auto grads = gram_gradients(base, x, y);
    REQUIRE(grads.size() == base.parameter_count());
    const double h = 1e-5;
    for (std::size_t p = 0; p < base.parameter_count(); ++p) {
      auto params = base.parameters();
      KernelSpec up = base, down = base;
      params[p] += h;
      up.set_parameters(params);
      params[p] -= 2 * h;
      down.set_parameters(params);
      const GramBundle gu = gram_bundle(up, x, y), gd = gram_bundle(down, x, y);
      auto check = [&](const Matrix& an, const Matrix& u, const Matrix& d) {
        for (std::size_t i = 0; i < 5; ++i) {
          for (std::size_t j = 0; j < 5; ++j) {
            const double fd = (u(i, j) - d(i, j)) / (2 * h);
            if (std::abs(an(i, j)) < 1e-6) {
              CHECK(std::abs(fd - an(i, j)) < 1e-9);
            } else {
              CHECK(std::abs(fd - an(i, j)) / std::abs(an(i, j)) < 1e-6);
            }
          }
        }
      };
      check(grads[p].kxy, gu.kxy, gd.kxy);
      check(grads[p].ktxx, gu.ktxx, gd.ktxx);
      check(grads[p].ktyy, gu.ktyy, gd.ktyy);
    }
  }
}

}
