#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "mmdopt/datasets.hpp"
#include "oracles.hpp"

using namespace mmdopt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mmdopt_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

DatasetError::Kind read_error(const fs::path& p, DataFormat f, std::string* message = nullptr) {
  try {
    read_dataset(p, f);
  } catch (const DatasetError& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected a DatasetError");
  return DatasetError::Kind::io;
}

struct Moments {
  double mean[2] = {0, 0};
  double cov[2][2] = {{0, 0}, {0, 0}};
  double n = 0;
};

Moments moments(const Matrix& a) {
  Moments m;
  m.n = static_cast<double>(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < 2; ++k) m.mean[k] += a(i, k) / m.n;
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) m.cov[k][l] += (a(i, k) - m.mean[k]) * (a(i, l) - m.mean[l]) / (m.n - 1);
    }
  }
  return m;
}

// Offset of each point from its nearest blob center.
Matrix residuals(const Matrix& a, double spacing, std::size_t grid) {
  Matrix r(a.rows(), 2);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < 2; ++k) {
      const double c = std::clamp(std::round(a(i, k) / spacing), 0.0, static_cast<double>(grid - 1));
      r(i, k) = a(i, k) - spacing * c;
    }
  }
  return r;
}

}  // namespace

TEST_SUITE("unit") {

TEST_CASE("blobs correlation and eigenvalues") {
  CHECK(BlobsParams{1.0}.correlation() == 0.0);
  const double rho = BlobsParams{6.0}.correlation();
  CHECK(rho == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK((1 + rho) / (1 - rho) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(1 + rho == doctest::Approx(12.0 / 7.0));
  CHECK(1 - rho == doctest::Approx(2.0 / 7.0));
  CHECK_THROWS_AS(blobs_generate({0.5}), std::invalid_argument);
  CHECK_THROWS_AS(blobs_generate({6.0, 5, 10.0, 0}), std::invalid_argument);
}

TEST_CASE("blobs are deterministic and X ignores epsilon") {
  const SamplePair a = blobs_generate({6.0, 5, 10.0, 200, 3});
  const SamplePair b = blobs_generate({6.0, 5, 10.0, 200, 3});
  const SamplePair c = blobs_generate({2.0, 5, 10.0, 200, 3});
  const SamplePair d = blobs_generate({6.0, 5, 10.0, 200, 4});
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x == c.x);
  CHECK(a.y != c.y);
  CHECK(a.x != d.x);
  CHECK(a.x.rows() == 200);
  CHECK(a.x.cols() == 2);
}

TEST_CASE("gauss_vs_laplace shapes and determinism") {
  const SamplePair a = gauss_vs_laplace(50, 3, 1), b = gauss_vs_laplace(50, 3, 1);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x.cols() == 3);
  CHECK(a.y.rows() == 50);
  CHECK_THROWS_AS(gauss_vs_laplace(0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(gauss_vs_laplace(5, 0, 1), std::invalid_argument);
}

TEST_CASE("binary round trip is bit exact") {
  TempDir dir;
  std::mt19937_64 rng(30);
  Matrix a = oracle::normal_matrix(17, 3, rng);
  a(0, 0) = -0.0;
  a(1, 1) = 5e-324;
  a(2, 2) = 1.7976931348623157e308;
  write_dataset(a, dir / "a.bin");
  const Matrix b = read_dataset(dir / "a.bin");
  REQUIRE(b.rows() == 17);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(a.data()[i]) == std::bit_cast<std::uint64_t>(b.data()[i]));
  }
}

TEST_CASE("csv round trip is exact at 17 significant digits") {
  TempDir dir;
  std::mt19937_64 rng(31);
  const Matrix a = oracle::normal_matrix(23, 2, rng, 0.0, 1e5);
  write_dataset(a, dir / "a.csv");
  CHECK(read_dataset(dir / "a.csv") == a);
  CHECK(format_for_path("x.bin") == DataFormat::bin);
  CHECK(format_for_path("x.csv") == DataFormat::csv);
  CHECK(format_for_path("x.txt") == DataFormat::csv);
}

TEST_CASE("csv parsing tolerates blank trailing lines and CRLF") {
  TempDir dir;
  write_text(dir / "a.csv", "1,2\r\n3.5,-4e-3\r\n\n");
  const Matrix a = read_dataset(dir / "a.csv");
  CHECK(a == Matrix{{1.0, 2.0}, {3.5, -4e-3}});
}

TEST_CASE("read errors have distinct kinds") {
  TempDir dir;
  write_text(dir / "empty.csv", "");
  write_text(dir / "empty.bin", "");
  write_text(dir / "bad.csv", "1,2\n3,abc\n");
  write_text(dir / "ragged.csv", "1,2\n3,4\n5,6,7\n8,9\n");
  write_text(dir / "magic.bin", "NOPE0000000000000000");
  write_text(dir / "short.bin", "MMD1\x02");
  CHECK(read_error(dir / "missing.csv", DataFormat::csv) == DatasetError::Kind::io);
  CHECK(read_error(dir / "empty.csv", DataFormat::csv) == DatasetError::Kind::empty);
  CHECK(read_error(dir / "empty.bin", DataFormat::bin) == DatasetError::Kind::empty);
  CHECK(read_error(dir / "bad.csv", DataFormat::csv) == DatasetError::Kind::malformed);
  std::string message;
  CHECK(read_error(dir / "ragged.csv", DataFormat::csv, &message) == DatasetError::Kind::ragged);
  CHECK(message.find(":3:") != std::string::npos);
  CHECK(read_error(dir / "magic.bin", DataFormat::bin) == DatasetError::Kind::bad_magic);
  CHECK(read_error(dir / "short.bin", DataFormat::bin) == DatasetError::Kind::truncated);

  Matrix a{{1.0, 2.0}};
  write_dataset(a, dir / "ok.bin");
  {
    std::ofstream f(dir / "ok.bin", std::ios::binary | std::ios::app);
    f << 'x';
  }
  CHECK(read_error(dir / "ok.bin", DataFormat::bin) == DatasetError::Kind::malformed);
  write_dataset(a, dir / "cut.bin");
  fs::resize_file(dir / "cut.bin", fs::file_size(dir / "cut.bin") - 3);
  CHECK(read_error(dir / "cut.bin", DataFormat::bin) == DatasetError::Kind::truncated);
}

}

TEST_SUITE("statistical") {

TEST_CASE("blobs moments at m = 1e5") {
  const std::size_t m = 100000;
  const SamplePair s = blobs_generate({6.0, 5, 10.0, m, 77});
  const Moments mx = moments(s.x);
  const double se_mean = std::sqrt(201.0 / m);  // center variance 200 plus unit noise
  CHECK(std::abs(mx.mean[0] - 20.0) < 3 * se_mean);
  CHECK(std::abs(mx.mean[1] - 20.0) < 3 * se_mean);

  const double rho = 5.0 / 7.0;
  const Moments ry = moments(residuals(s.y, 10.0, 5));
  const double se_var = std::sqrt(2.0 / m), se_cov = std::sqrt((1 + rho * rho) / m);
  CHECK(std::abs(ry.cov[0][0] - 1.0) < 4 * se_var);
  CHECK(std::abs(ry.cov[1][1] - 1.0) < 4 * se_var);
  CHECK(std::abs(ry.cov[0][1] - rho) < 4 * se_cov);
  const Moments rx = moments(residuals(s.x, 10.0, 5));
  CHECK(std::abs(rx.cov[0][0] - 1.0) < 4 * se_var);
  CHECK(std::abs(rx.cov[0][1]) < 4 * std::sqrt(1.0 / m));

  // Per blob: each of the 25 centers gets about m / 25 points.
  std::vector<std::vector<std::size_t>> members(25);
  for (std::size_t i = 0; i < m; ++i) {
    const auto cx = static_cast<std::size_t>(std::clamp(std::round(s.y(i, 0) / 10.0), 0.0, 4.0));
    const auto cy = static_cast<std::size_t>(std::clamp(std::round(s.y(i, 1) / 10.0), 0.0, 4.0));
    members[cx * 5 + cy].push_back(i);
  }
  for (const auto& idx : members) {
    const double n = static_cast<double>(idx.size());
    CHECK(std::abs(n - m / 25.0) < 4 * std::sqrt(m * (1.0 / 25) * (24.0 / 25)));
    const Moments b = moments(residuals(s.y.select_rows(idx), 10.0, 5));
    CHECK(std::abs(b.cov[0][1] - rho) < 4 * std::sqrt((1 + rho * rho) / n));
  }
}

TEST_CASE("gauss vs laplace moments at m = 1e5") {
  const std::size_t m = 100000;
  const SamplePair s = gauss_vs_laplace(m, 2, 5);
  for (const Matrix* a : {&s.x, &s.y}) {
    for (std::size_t k = 0; k < 2; ++k) {
      double mean = 0, m2 = 0, m4 = 0;
      for (std::size_t i = 0; i < m; ++i) mean += (*a)(i, k) / m;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = (*a)(i, k) - mean;
        m2 += d * d / m;
        m4 += d * d * d * d / m;
      }
      const bool laplace = a == &s.y;
      const double kurt = m4 / (m2 * m2);
      CHECK(std::abs(mean) < 4 * std::sqrt(1.0 / m));
      // Var of the sample variance: (mu4 - 1) / m with mu4 = 3 (Gauss) or 6 (Laplace).
      CHECK(std::abs(m2 - 1.0) < 4 * std::sqrt((laplace ? 5.0 : 2.0) / m));
      // Kurtosis standard error: about sqrt(24 / m) for Gauss, about 0.2 for Laplace.
      CHECK(std::abs(kurt - (laplace ? 6.0 : 3.0)) < (laplace ? 0.8 : 0.07));
    }
  }
}

}
