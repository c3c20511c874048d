#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttnet {

/// Relative singular-value cutoff used when no tolerance is given.
inline constexpr double kDefaultRelTol = 1e-9;

/// Raised when a text or binary input does not follow its documented grammar.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mode sizes (n_1, ..., n_d) of a tensor. Never empty, every entry >= 1.
class Shape {
 public:
  explicit Shape(std::vector<std::size_t> dims);
  Shape(std::initializer_list<std::size_t> dims);

  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t operator[](std::size_t k) const { return dims_.at(k); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  /// Total number of entries.
  std::size_t size() const noexcept { return size_; }

  /// Row-major offset, last axis fastest. Throws std::out_of_range.
  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;

  std::string to_string() const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 1;
};

/// Dense d-way array of doubles in row-major order.
class DenseTensor {
 public:
  /// Zero-filled tensor.
  explicit DenseTensor(Shape shape);
  /// Takes ownership of `data`; its length must equal shape.size() and all
  /// entries must be finite.
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.order(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  double at(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Partition of the axes {1..d} into row axes s and column axes t.
/// Labels are 1-based and stored sorted.
class AxisSplit {
 public:
  /// `row_axes` is s; t is its complement in {1..order}.
  AxisSplit(std::vector<std::size_t> row_axes, std::size_t order);

  /// s = {1, ..., k}.
  static AxisSplit prefix(std::size_t k, std::size_t order);
  /// s = {1, 3, ..., d-1}, t = {2, 4, ..., d}; d must be even.
  static AxisSplit odd_even(std::size_t order);
  /// s = {first, ..., last} (1-based, inclusive).
  static AxisSplit range(std::size_t first, std::size_t last, std::size_t order);

  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  const std::vector<std::size_t>& cols() const noexcept { return cols_; }
  std::size_t order() const noexcept { return rows_.size() + cols_.size(); }

  std::string to_string() const;

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
};

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

/// Dense 3-way array (d0, d1, d2), row-major. Used for TT cores (r_{k-1}, n_k, r_k),
/// hierarchical transfer tensors (r_left, r_right, r_out) and class heads.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2);
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, std::vector<double> data);

  std::size_t dim0() const noexcept { return d0_; }
  std::size_t dim1() const noexcept { return d1_; }
  std::size_t dim2() const noexcept { return d2_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t a, std::size_t i, std::size_t b) const {
    return data_[(a * d1_ + i) * d2_ + b];
  }
  double& operator()(std::size_t a, std::size_t i, std::size_t b) {
    return data_[(a * d1_ + i) * d2_ + b];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// The d0 x d2 matrix at fixed middle index.
  Matrix slice(std::size_t i) const;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t d0_ = 0;
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::vector<double> data_;
};

/// Reshapes x into the (s, t) matricization. Row index of (i_{s_1}, ..., i_{s_p})
/// is row-major over s with the last listed axis fastest; columns likewise over t.
Matrix matricize(const DenseTensor& x, const AxisSplit& split);

/// Inverse of matricize.
DenseTensor dematricize(const Matrix& m, const Shape& shape, const AxisSplit& split);

/// Total sum of the entry-wise product.
double inner_product(const DenseTensor& x, const DenseTensor& y);
double frobenius_norm(const DenseTensor& x);

}  // namespace ttnet
