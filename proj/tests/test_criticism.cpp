#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mmdopt/criticism.hpp"
#include "mmdopt/error.hpp"
#include "oracles.hpp"

using namespace mmdopt;

TEST_SUITE("unit") {

TEST_CASE("witness matches the mean-embedding oracle") {
  std::mt19937_64 rng(40);
  const Matrix x = oracle::normal_matrix(13, 2, rng), y = oracle::normal_matrix(9, 2, rng, 1.0);
  const Matrix probes = oracle::normal_matrix(7, 2, rng, 0.5);
  const auto w = witness(KernelSpec::rbf(0.9), x, y, probes);
  const Matrix kx = oracle::gram(probes, x, 0.9), ky = oracle::gram(probes, y, 0.9);
  for (std::size_t t = 0; t < 7; ++t) {
    long double a = 0, b = 0;
    for (std::size_t i = 0; i < 13; ++i) a += kx(t, i);
    for (std::size_t j = 0; j < 9; ++j) b += ky(t, j);
    CHECK(w[t] == doctest::Approx(static_cast<double>(a / 13 - b / 9)).epsilon(1e-13));
  }
}

TEST_CASE("witness vanishes for identical samples and flips sign under swap") {
  std::mt19937_64 rng(41);
  const Matrix x = oracle::normal_matrix(20, 3, rng), y = oracle::normal_matrix(25, 3, rng, 0.4);
  const Matrix probes = oracle::normal_matrix(30, 3, rng);
  const KernelSpec s = KernelSpec::rbf(1.3);
  for (double v : witness(s, x, x, probes)) CHECK(v == 0.0);
  const auto a = witness(s, x, y, probes), b = witness(s, y, x, probes);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == -b[i]);
}

TEST_CASE("witness is linear in the empirical measure") {
  std::mt19937_64 rng(42);
  const Matrix x1 = oracle::normal_matrix(8, 2, rng), x2 = oracle::normal_matrix(12, 2, rng, 0.3);
  const Matrix y = oracle::normal_matrix(10, 2, rng, -0.5), probes = oracle::normal_matrix(6, 2, rng);
  const KernelSpec s = KernelSpec::rbf(1.1);
  const auto whole = witness(s, x1.stacked(x2), y, probes);
  const auto w1 = witness(s, x1, y, probes), w2 = witness(s, x2, y, probes);
  for (std::size_t t = 0; t < 6; ++t) CHECK(whole[t] == doctest::Approx(0.4 * w1[t] + 0.6 * w2[t]).epsilon(1e-13));
}

TEST_CASE("witness decays far from the data and checks dimensions") {
  std::mt19937_64 rng(43);
  const Matrix x = oracle::normal_matrix(10, 2, rng), y = oracle::normal_matrix(10, 2, rng, 1.0);
  const auto far = witness(KernelSpec::rbf(1.0), x, y, Matrix{{1e3, 1e3}});
  CHECK(std::abs(far[0]) < 1e-300);
  CHECK_THROWS_AS(witness(KernelSpec::rbf(1.0), x, y, Matrix{{1.0}}), DataError);
  CHECK_THROWS_AS(witness(KernelSpec::rbf(1.0), x, Matrix{{1.0}}, x), DataError);
}

TEST_CASE("extremes examples and tie rule") {
  const std::vector<double> v{3, 1, 2};
  const Extremes e = extremes(v, 1);
  CHECK(e.top_positive == std::vector<std::size_t>{0});
  CHECK(e.top_negative == std::vector<std::size_t>{1});
  const std::vector<double> flat(6, 0.5);
  const Extremes f = extremes(flat, 3);
  CHECK(f.top_positive == std::vector<std::size_t>{0, 1, 2});
  CHECK(f.top_negative == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(extremes(v, 4), std::invalid_argument);
  CHECK(extremes(v, 0).top_positive.empty());
}

TEST_CASE("extremes agree with a full-sort oracle") {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> u(0, 20);  // coarse values force ties
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(40);
    for (double& a : v) a = u(rng);
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto desc = idx, asc = idx;
    std::stable_sort(desc.begin(), desc.end(), [&](auto a, auto b) { return v[a] > v[b]; });
    std::stable_sort(asc.begin(), asc.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    const Extremes e = extremes(v, 7);
    CHECK(e.top_positive == std::vector<std::size_t>(desc.begin(), desc.begin() + 7));
    CHECK(e.top_negative == std::vector<std::size_t>(asc.begin(), asc.begin() + 7));
  }
}

TEST_CASE("witness report with labeled probes") {
  std::mt19937_64 rng(45);
  const Matrix x = oracle::normal_matrix(30, 1, rng), y = oracle::normal_matrix(30, 1, rng, 3.0);
  const Matrix probes = oracle::normal_matrix(10, 1, rng).stacked(oracle::normal_matrix(10, 1, rng, 3.0));
  std::vector<int> labels(20, 0);
  std::fill(labels.begin() + 10, labels.end(), 1);
  const WitnessReport r = witness_report(KernelSpec::rbf(1.0), x, y, probes, 3, labels);
  REQUIRE(r.mean_gap.has_value());
  double a = 0, b = 0;
  for (int i = 0; i < 10; ++i) a += r.values[i] / 10;
  for (int i = 10; i < 20; ++i) b += r.values[i] / 10;
  CHECK(*r.mean_gap == doctest::Approx(a - b));
  CHECK(*r.mean_gap > 0);
  CHECK(r.top_positive.size() == 3);
  for (std::size_t i = 1; i < 3; ++i) CHECK(r.values[r.top_positive[i - 1]] >= r.values[r.top_positive[i]]);
  for (std::size_t i = 1; i < 3; ++i) CHECK(r.values[r.top_negative[i - 1]] <= r.values[r.top_negative[i]]);
  CHECK_FALSE(witness_report(KernelSpec::rbf(1.0), x, y, probes, 3).mean_gap.has_value());
  CHECK_THROWS_AS(witness_report(KernelSpec::rbf(1.0), x, y, probes, 3, std::vector<int>(5, 0)), DataError);
}

}

TEST_SUITE("statistical") {

TEST_CASE("witness sign for shifted 1-D Gaussians") {
  std::mt19937_64 rng(46);
  const Matrix x = oracle::normal_matrix(2000, 1, rng, 0.0), y = oracle::normal_matrix(2000, 1, rng, 4.0);
  const auto w = witness(KernelSpec::rbf(1.0), x, y, Matrix{{0.0}, {4.0}});
  CHECK(w[0] > 0);
  CHECK(w[1] < 0);
}

}
