#pragma once

#include <cstddef>
#include <vector>

#include "ttnet/tensor_core.hpp"

namespace ttnet {

/// Thin SVD A = U diag(s) V^T with k = min(rows, cols). Singular values are
/// sorted in non-increasing order. Columns of U belonging to zero singular
/// values are zero.
struct SvdResult {
  Matrix u;
  std::vector<double> singular_values;
  Matrix v;
};

/// One-sided (Hestenes) Jacobi SVD. Converges to full relative accuracy on
/// the column space; throws std::invalid_argument on non-finite input.
SvdResult svd(const Matrix& a);

std::vector<double> singular_values(const Matrix& a);

/// Number of singular values strictly greater than rel_tol * sigma_max.
/// Returns 0 for the zero matrix. rel_tol must lie in (0, 1).
std::size_t numerical_rank(const Matrix& m, double rel_tol = kDefaultRelTol);

/// Same count applied to an already computed, sorted spectrum.
std::size_t count_above(const std::vector<double>& sorted_singular_values, double rel_tol);

}  // namespace ttnet
