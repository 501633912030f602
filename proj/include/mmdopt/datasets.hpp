#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "mmdopt/error.hpp"
#include "mmdopt/matrix.hpp"

namespace mmdopt {

/// Blobs benchmark: P is a grid_size x grid_size grid of 2-D standard
/// normals with the given center spacing; Q has the same centers but
/// within-blob correlation (epsilon - 1) / (epsilon + 1), so the eigenvalue
/// ratio of each Q blob's covariance is epsilon.
struct BlobsParams {
  double epsilon = 1.0;
  std::size_t grid_size = 5;
  double spacing = 10.0;
  std::size_t m = 500;
  std::uint64_t seed = 0;

  double correlation() const { return (epsilon - 1.0) / (epsilon + 1.0); }
};

struct SamplePair {
  Dataset x;
  Dataset y;
};

/// X and Y come from independent random streams of the same seed; changing
/// epsilon only changes the shape of Y's noise.
SamplePair blobs_generate(const BlobsParams& p);

/// X ~ N(0, I_d); Y has i.i.d. zero-mean Laplace coordinates with unit
/// variance (scale 1/sqrt(2)).
SamplePair gauss_vs_laplace(std::size_t m, std::size_t d, std::uint64_t seed);

enum class DataFormat { csv, bin };

/// Picks bin for a ".bin" extension, csv otherwise.
DataFormat format_for_path(const std::filesystem::path& path);

class DatasetError : public DataError {
 public:
  enum class Kind { io, empty, malformed, ragged, bad_magic, truncated };

  DatasetError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// CSV: no header, one row per line, comma-separated decimals written with
/// 17 significant digits. Binary: "MMD1", u64 rows, u64 cols (both little
/// endian), then row-major little-endian float64 values.
Dataset read_dataset(const std::filesystem::path& path, DataFormat format);
void write_dataset(const Dataset& data, const std::filesystem::path& path, DataFormat format);

inline Dataset read_dataset(const std::filesystem::path& path) { return read_dataset(path, format_for_path(path)); }
inline void write_dataset(const Dataset& data, const std::filesystem::path& path) {
  write_dataset(data, path, format_for_path(path));
}

}  // namespace mmdopt
