#include "mmdopt/matrix.hpp"

#include <algorithm>
#include <cstdlib>
#include <new>

#include <sys/mman.h>

#include "mmdopt/error.hpp"

namespace mmdopt {

namespace detail {

namespace {
constexpr std::size_t kHugePage = std::size_t{1} << 21;
}

void* allocate_block(std::size_t bytes) {
  if (bytes < 4 * kHugePage) {
    void* p = std::malloc(bytes ? bytes : 1);
    if (!p) throw std::bad_alloc();
    return p;
  }
  const std::size_t rounded = (bytes + kHugePage - 1) / kHugePage * kHugePage;
  void* p = std::aligned_alloc(kHugePage, rounded);
  if (!p) throw std::bad_alloc();
  madvise(p, rounded, MADV_HUGEPAGE);  // advisory; failure just means small pages
  return p;
}

void free_block(void* p, std::size_t) noexcept { std::free(p); }

}  // namespace detail

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
  if (data_.size() != rows_ * cols_) {
    throw DataError("matrix data size does not match its shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DataError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw DataError("row index out of range");
    std::ranges::copy(row(indices[i]), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::stacked(const Matrix& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (other.cols_ != cols_) throw DataError("cannot stack matrices with different column counts");
  Matrix out(rows_ + other.rows_, cols_);
  std::ranges::copy(data_, out.data_.begin());
  std::ranges::copy(other.data_, out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
  return out;
}

}  // namespace mmdopt
