#include "ttnet/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ttnet {

namespace {

std::string join(const std::vector<std::size_t>& values, const char* sep) {
  std::ostringstream out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << sep;
    out << values[k];
  }
  return out.str();
}

void check_finite(std::span<const double> data) {
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!std::isfinite(data[k])) {
      throw std::invalid_argument("non-finite entry at flat offset " + std::to_string(k));
    }
  }
}

// Row-major strides of the sub-shape formed by `axes` (1-based).
std::vector<std::size_t> group_strides(const Shape& shape, const std::vector<std::size_t>& axes) {
  std::vector<std::size_t> strides(axes.size());
  std::size_t stride = 1;
  for (std::size_t k = axes.size(); k-- > 0;) {
    strides[k] = stride;
    stride *= shape[axes[k] - 1];
  }
  return strides;
}

std::size_t group_size(const Shape& shape, const std::vector<std::size_t>& axes) {
  std::size_t n = 1;
  for (auto a : axes) n *= shape[a - 1];
  return n;
}

void check_split(const Shape& shape, const AxisSplit& split) {
  if (split.order() > shape.order()) {
    throw std::invalid_argument("axis " + std::to_string(split.order()) +
                                " does not exist in a tensor of order " +
                                std::to_string(shape.order()));
  }
  if (split.order() < shape.order()) {
    throw std::invalid_argument("axis " + std::to_string(split.order() + 1) +
                                " is in neither s nor t");
  }
}

// For every flat tensor offset, the (row, col) it lands on in the matricization.
template <typename Fn>
void for_each_matricized(const Shape& shape, const AxisSplit& split, Fn&& fn) {
  const std::size_t d = shape.order();
  std::vector<std::size_t> row_stride(d, 0), col_stride(d, 0);
  const auto rs = group_strides(shape, split.rows());
  const auto cs = group_strides(shape, split.cols());
  for (std::size_t k = 0; k < split.rows().size(); ++k) row_stride[split.rows()[k] - 1] = rs[k];
  for (std::size_t k = 0; k < split.cols().size(); ++k) col_stride[split.cols()[k] - 1] = cs[k];

  std::vector<std::size_t> idx(d, 0);
  std::size_t row = 0, col = 0;
  for (std::size_t flat = 0; flat < shape.size(); ++flat) {
    fn(flat, row, col);
    // Odometer increment, last axis fastest.
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < shape[k]) {
        row += row_stride[k];
        col += col_stride[k];
        break;
      }
      row -= row_stride[k] * (shape[k] - 1);
      col -= col_stride[k] * (shape[k] - 1);
      idx[k] = 0;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Shape

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("shape must have at least one mode");
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (dims_[k] == 0) {
      throw std::invalid_argument("mode " + std::to_string(k + 1) + " has size 0");
    }
    if (size_ > std::numeric_limits<std::size_t>::max() / dims_[k]) {
      throw std::overflow_error("shape " + to_string() + " overflows the index type");
    }
    size_ *= dims_[k];
  }
}

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

std::size_t Shape::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) {
    throw std::out_of_range("index of length " + std::to_string(index.size()) +
                            " for tensor of order " + std::to_string(dims_.size()));
  }
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] >= dims_[k]) {
      throw std::out_of_range("index " + std::to_string(index[k]) + " out of range for mode " +
                              std::to_string(k + 1) + " of size " + std::to_string(dims_[k]));
    }
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

std::vector<std::size_t> Shape::multi_index(std::size_t flat) const {
  if (flat >= size_) throw std::out_of_range("flat offset out of range");
  std::vector<std::size_t> idx(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    idx[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return idx;
}

std::string Shape::to_string() const { return "(" + join(dims_, ",") + ")"; }

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)), data_(shape_.size(), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw std::invalid_argument("tensor of shape " + shape_.to_string() + " needs " +
                                std::to_string(shape_.size()) + " values, got " +
                                std::to_string(data_.size()));
  }
  check_finite(data_);
}

double DenseTensor::at(std::span<const std::size_t> index) const {
  return data_[shape_.flat_index(index)];
}
double& DenseTensor::at(std::span<const std::size_t> index) {
  return data_[shape_.flat_index(index)];
}
double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}
double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

// ---------------------------------------------------------------------------
// AxisSplit

AxisSplit::AxisSplit(std::vector<std::size_t> row_axes, std::size_t order)
    : rows_(std::move(row_axes)) {
  std::vector<bool> used(order + 1, false);
  for (auto a : rows_) {
    if (a < 1 || a > order) {
      throw std::invalid_argument("axis " + std::to_string(a) + " is outside 1.." +
                                  std::to_string(order));
    }
    if (used[a]) throw std::invalid_argument("axis " + std::to_string(a) + " listed twice");
    used[a] = true;
  }
  if (rows_.empty()) throw std::invalid_argument("row axis set s is empty");
  for (std::size_t a = 1; a <= order; ++a) {
    if (!used[a]) cols_.push_back(a);
  }
  if (cols_.empty()) throw std::invalid_argument("column axis set t is empty");
  std::sort(rows_.begin(), rows_.end());
}

AxisSplit AxisSplit::prefix(std::size_t k, std::size_t order) {
  std::vector<std::size_t> s(k);
  std::iota(s.begin(), s.end(), std::size_t{1});
  return AxisSplit(std::move(s), order);
}

AxisSplit AxisSplit::odd_even(std::size_t order) {
  if (order % 2 != 0) {
    throw std::invalid_argument("odd/even split needs an even order, got " + std::to_string(order));
  }
  std::vector<std::size_t> s;
  for (std::size_t a = 1; a <= order; a += 2) s.push_back(a);
  return AxisSplit(std::move(s), order);
}

AxisSplit AxisSplit::range(std::size_t first, std::size_t last, std::size_t order) {
  if (first < 1 || first > last) throw std::invalid_argument("empty axis range");
  std::vector<std::size_t> s;
  for (std::size_t a = first; a <= last; ++a) s.push_back(a);
  return AxisSplit(std::move(s), order);
}

std::string AxisSplit::to_string() const {
  return "s={" + join(rows_, ",") + "} t={" + join(cols_, ",") + "}";
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("matrix dimensions must be positive");
  if (data_.size() != rows * cols) {
    throw std::invalid_argument(std::to_string(rows) + "x" + std::to_string(cols) +
                                " matrix needs " + std::to_string(rows * cols) + " values, got " +
                                std::to_string(data_.size()));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matrix product dimension mismatch: " + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Tensor3

Tensor3::Tensor3(std::size_t d0, std::size_t d1, std::size_t d2)
    : Tensor3(d0, d1, d2, std::vector<double>(d0 * d1 * d2, 0.0)) {}

Tensor3::Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, std::vector<double> data)
    : d0_(d0), d1_(d1), d2_(d2), data_(std::move(data)) {
  if (d0 == 0 || d1 == 0 || d2 == 0) throw std::invalid_argument("3-way array dimensions must be positive");
  if (data_.size() != d0 * d1 * d2) {
    throw std::invalid_argument("3-way array of dims (" + std::to_string(d0) + "," +
                                std::to_string(d1) + "," + std::to_string(d2) + ") needs " +
                                std::to_string(d0 * d1 * d2) + " values, got " +
                                std::to_string(data_.size()));
  }
}

Matrix Tensor3::slice(std::size_t i) const {
  if (i >= d1_) throw std::out_of_range("slice index " + std::to_string(i) + " >= " + std::to_string(d1_));
  Matrix m(d0_, d2_);
  for (std::size_t a = 0; a < d0_; ++a)
    for (std::size_t b = 0; b < d2_; ++b) m(a, b) = (*this)(a, i, b);
  return m;
}

// ---------------------------------------------------------------------------
// Matricization

Matrix matricize(const DenseTensor& x, const AxisSplit& split) {
  check_split(x.shape(), split);
  const std::size_t rows = group_size(x.shape(), split.rows());
  const std::size_t cols = group_size(x.shape(), split.cols());
  Matrix m(rows, cols);
  auto src = x.data();
  for_each_matricized(x.shape(), split,
                      [&](std::size_t flat, std::size_t r, std::size_t c) { m(r, c) = src[flat]; });
  return m;
}

DenseTensor dematricize(const Matrix& m, const Shape& shape, const AxisSplit& split) {
  check_split(shape, split);
  const std::size_t rows = group_size(shape, split.rows());
  const std::size_t cols = group_size(shape, split.cols());
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument("matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " but shape " + shape.to_string() +
                                " with " + split.to_string() + " needs " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
  std::vector<double> data(shape.size());
  for_each_matricized(shape, split,
                      [&](std::size_t flat, std::size_t r, std::size_t c) { data[flat] = m(r, c); });
  return DenseTensor(shape, std::move(data));
}

double inner_product(const DenseTensor& x, const DenseTensor& y) {
  if (!(x.shape() == y.shape())) {
    throw std::invalid_argument("inner product of shapes " + x.shape().to_string() + " and " +
                                y.shape().to_string());
  }
  double s = 0.0;
  auto a = x.data();
  auto b = y.data();
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double frobenius_norm(const DenseTensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace ttnet
