#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace octbd {

/// Dense column-major matrix. Column c is contiguous, which matches the
/// A-line-contiguous layout of spectral frames and depth images.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<T> column(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const T> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

}  // namespace octbd
