#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mmdopt {

/// Allocator that asks for transparent huge pages on large blocks; Gram
/// matrices are streamed end to end and otherwise thrash the TLB.
template <typename T>
struct LargePageAllocator {
  using value_type = T;
  LargePageAllocator() = default;
  template <typename U>
  LargePageAllocator(const LargePageAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t n) noexcept;
  friend bool operator==(const LargePageAllocator&, const LargePageAllocator&) = default;
};

namespace detail {
void* allocate_block(std::size_t bytes);
void free_block(void* p, std::size_t bytes) noexcept;
}  // namespace detail

template <typename T>
T* LargePageAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(detail::allocate_block(n * sizeof(T)));
}

template <typename T>
void LargePageAllocator<T>::deallocate(T* p, std::size_t n) noexcept {
  detail::free_block(p, n * sizeof(T));
}

/// Dense row-major matrix of doubles. Used both for datasets (row =
/// observation) and for Gram matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  /// Rows `indices` of this matrix, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  /// This matrix with `other`'s rows appended below.
  Matrix stacked(const Matrix& other) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double, LargePageAllocator<double>> data_;
};

using Dataset = Matrix;

}  // namespace mmdopt
