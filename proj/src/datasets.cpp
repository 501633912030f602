#include "mmdopt/datasets.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mmdopt/rng.hpp"

namespace mmdopt {

namespace {

void draw_blobs(Dataset& out, const BlobsParams& p, double rho, StreamTag tag) {
  RandomStream rng(p.seed, tag);
  std::normal_distribution<double> normal;
  const double rho_perp = std::sqrt(1.0 - rho * rho);
  const std::uint64_t cells = p.grid_size * p.grid_size;
  for (std::size_t i = 0; i < p.m; ++i) {
    const std::uint64_t cell = rng.below(cells);
    const double cx = p.spacing * static_cast<double>(cell / p.grid_size);
    const double cy = p.spacing * static_cast<double>(cell % p.grid_size);
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    out(i, 0) = cx + z1;
    out(i, 1) = cy + rho * z1 + rho_perp * z2;
  }
}

}  // namespace

SamplePair blobs_generate(const BlobsParams& p) {
  if (!(p.epsilon >= 1.0) || !std::isfinite(p.epsilon)) throw std::invalid_argument("blobs epsilon must be >= 1");
  if (p.m < 1) throw std::invalid_argument("blobs sample size must be positive");
  if (p.grid_size < 1) throw std::invalid_argument("blobs grid size must be positive");
  SamplePair s{Dataset(p.m, 2), Dataset(p.m, 2)};
  draw_blobs(s.x, p, 0.0, StreamTag::blobs_x);
  draw_blobs(s.y, p, p.correlation(), StreamTag::blobs_y);
  return s;
}

SamplePair gauss_vs_laplace(std::size_t m, std::size_t d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw std::invalid_argument("sample size and dimension must be positive");
  SamplePair s{Dataset(m, d), Dataset(m, d)};
  RandomStream gx(seed, StreamTag::gauss_x);
  RandomStream ly(seed, StreamTag::laplace_y);
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> expo;
  const double scale = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.x(i, j) = normal(gx);
      // Difference of two unit exponentials is standard Laplace.
      s.y(i, j) = scale * (expo(ly) - expo(ly));
    }
  }
  return s;
}

DataFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? DataFormat::bin : DataFormat::csv;
}

namespace {

constexpr std::array<char, 4> kMagic{'M', 'M', 'D', '1'};

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(DatasetError::Kind::io, "cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (cur < end && *cur == ' ') ++cur;
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cur, end, v);
      if (ec != std::errc()) {
        throw DatasetError(DatasetError::Kind::malformed,
                           path.string() + ":" + std::to_string(line_no) + ": cannot parse number");
      }
      values.push_back(v);
      ++count;
      cur = ptr;
      while (cur < end && *cur == ' ') ++cur;
      if (cur == end) break;
      if (*cur != ',') {
        throw DatasetError(DatasetError::Kind::malformed,
                           path.string() + ":" + std::to_string(line_no) + ": expected ','");
      }
      ++cur;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw DatasetError(DatasetError::Kind::ragged, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                                         std::to_string(cols) + " values, found " +
                                                         std::to_string(count));
    }
    ++rows;
  }
  if (in.bad()) throw DatasetError(DatasetError::Kind::io, "error reading " + path.string());
  if (rows == 0) throw DatasetError(DatasetError::Kind::empty, path.string() + ": no data rows");
  return Dataset(rows, cols, std::move(values));
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(DatasetError::Kind::io, "cannot write " + path.string());
  std::array<char, 64> buf{};
  std::string line;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j) line.push_back(',');
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), data(i, j), std::chars_format::general, 17);
      line.append(buf.data(), res.ptr);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw DatasetError(DatasetError::Kind::io, "error writing " + path.string());
}

Dataset read_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetError::Kind::io, "cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() == 0) throw DatasetError(DatasetError::Kind::empty, path.string() + ": empty file");
  if (in.gcount() != 4 || magic != kMagic) {
    throw DatasetError(DatasetError::Kind::bad_magic, path.string() + ": not an MMD1 file");
  }
  std::uint64_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != sizeof header) throw DatasetError(DatasetError::Kind::truncated, path.string() + ": short header");
  const std::uint64_t rows = to_little_endian(header[0]);
  const std::uint64_t cols = to_little_endian(header[1]);
  if (rows == 0 || cols == 0) throw DatasetError(DatasetError::Kind::empty, path.string() + ": no data");
  if (rows > (std::uint64_t{1} << 40) / cols) throw DatasetError(DatasetError::Kind::malformed, path.string() + ": implausible shape");
  std::vector<double> values(rows * cols);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(double)) {
    throw DatasetError(DatasetError::Kind::truncated, path.string() + ": fewer values than the header declares");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DatasetError(DatasetError::Kind::malformed, path.string() + ": trailing bytes after data");
  }
  for (double& v : values) v = to_little_endian(v);
  return Dataset(rows, cols, std::move(values));
}

void write_bin(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(DatasetError::Kind::io, "cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t header[2] = {to_little_endian<std::uint64_t>(data.rows()),
                                   to_little_endian<std::uint64_t>(data.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (double v : data.values()) {
    const double le = to_little_endian(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  if (!out) throw DatasetError(DatasetError::Kind::io, "error writing " + path.string());
}

}  // namespace

Dataset read_dataset(const std::filesystem::path& path, DataFormat format) {
  return format == DataFormat::bin ? read_bin(path) : read_csv(path);
}

void write_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format) {
  if (format == DataFormat::bin) {
    write_bin(data, path);
  } else {
    write_csv(data, path);
  }
}

}  // namespace mmdopt
