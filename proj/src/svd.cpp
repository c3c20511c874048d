#include "ttnet/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ttnet {

namespace {

constexpr int kMaxSweeps = 80;

struct ColumnSet {
  std::size_t length = 0;
  std::vector<std::vector<double>> cols;
};

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void rotate(std::vector<double>& x, std::vector<double>& y, double c, double s) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Orthogonalizes the columns of w in place; when v is non-null the same
// rotations are accumulated into it (v starts as the identity).
void jacobi_sweeps(ColumnSet& w, ColumnSet* v) {
  const std::size_t n = w.cols.size();
  const double tol = std::numeric_limits<double>::epsilon() *
                     std::sqrt(static_cast<double>(std::max<std::size_t>(w.length, 1)));
  std::vector<double> norm2(n);
  for (std::size_t j = 0; j < n; ++j) norm2[j] = dot(w.cols[j], w.cols[j]);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norm2[p];
        const double beta = norm2[q];
        const double gamma = dot(w.cols[p], w.cols[q]);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(w.cols[p], w.cols[q], c, s);
        if (v) rotate(v->cols[p], v->cols[q], c, s);
        norm2[p] = dot(w.cols[p], w.cols[p]);
        norm2[q] = dot(w.cols[q], w.cols[q]);
      }
    }
    if (!rotated) return;
  }
}

void require_finite(const Matrix& a) {
  for (double x : a.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument("matrix has non-finite entries");
  }
}

// Column view of `a` if it is tall, of its transpose otherwise.
ColumnSet tall_columns(const Matrix& a, bool transpose) {
  ColumnSet w;
  const std::size_t m = transpose ? a.cols() : a.rows();
  const std::size_t n = transpose ? a.rows() : a.cols();
  w.length = m;
  w.cols.assign(n, std::vector<double>(m));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (transpose) w.cols[i][j] = a(i, j);
      else w.cols[j][i] = a(i, j);
    }
  return w;
}

}  // namespace

SvdResult svd(const Matrix& a) {
  require_finite(a);
  const bool transpose = a.rows() < a.cols();
  ColumnSet w = tall_columns(a, transpose);
  const std::size_t n = w.cols.size();

  ColumnSet v;
  v.length = n;
  v.cols.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v.cols[j][j] = 1.0;

  jacobi_sweeps(w, &v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(w.cols[j], w.cols[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  // Tall factor: normalized columns of w. Short factor: columns of v.
  Matrix tall(w.length, n);
  Matrix short_side(n, n);
  SvdResult result;
  result.singular_values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    result.singular_values[k] = sigma[j];
    const double inv = sigma[j] > 0.0 ? 1.0 / sigma[j] : 0.0;
    for (std::size_t i = 0; i < w.length; ++i) tall(i, k) = w.cols[j][i] * inv;
    for (std::size_t i = 0; i < n; ++i) short_side(i, k) = v.cols[j][i];
  }
  if (transpose) {
    result.u = std::move(short_side);
    result.v = std::move(tall);
  } else {
    result.u = std::move(tall);
    result.v = std::move(short_side);
  }
  return result;
}

std::vector<double> singular_values(const Matrix& a) {
  require_finite(a);
  ColumnSet w = tall_columns(a, a.rows() < a.cols());
  jacobi_sweeps(w, nullptr);
  std::vector<double> sigma(w.cols.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) sigma[j] = std::sqrt(dot(w.cols[j], w.cols[j]));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

std::size_t count_above(const std::vector<double>& sorted_singular_values, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw std::invalid_argument("rel_tol must lie in (0, 1), got " + std::to_string(rel_tol));
  }
  if (sorted_singular_values.empty() || sorted_singular_values.front() == 0.0) return 0;
  const double cutoff = rel_tol * sorted_singular_values.front();
  return static_cast<std::size_t>(std::count_if(sorted_singular_values.begin(),
                                                sorted_singular_values.end(),
                                                [&](double s) { return s > cutoff; }));
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw std::invalid_argument("rel_tol must lie in (0, 1), got " + std::to_string(rel_tol));
  }
  return count_above(singular_values(m), rel_tol);
}

}  // namespace ttnet
