#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ttnet/tensor_core.hpp"

namespace ttnet {

/// Largest number of entries any *_to_dense call will materialize by default.
inline constexpr std::size_t kDenseCap = 10'000'000;

/// TT ranks (r_1, ..., r_{d-1}), or HT node ranks in heap order (see HTTensor).
using RankVector = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Tensor Train

/// X[i_1..i_d] = G_1[0,i_1,:] G_2[:,i_2,:] ... G_d[:,i_d,0].
/// Each core is a Tensor3 of dims (r_{k-1}, n_k, r_k) with r_0 = r_d = 1.
class TTTensor {
 public:
  explicit TTTensor(std::vector<Tensor3> cores);

  std::size_t order() const noexcept { return cores_.size(); }
  Shape shape() const;
  /// (r_1, ..., r_{d-1}); empty when d = 1.
  RankVector ranks() const;
  const std::vector<Tensor3>& cores() const noexcept { return cores_; }

 private:
  std::vector<Tensor3> cores_;
};

double tt_entry(const TTTensor& tt, std::span<const std::size_t> index);
DenseTensor tt_to_dense(const TTTensor& tt, std::size_t max_entries = kDenseCap);

/// Sequential SVD sweep from the left. Rank k keeps singular values above
/// rel_tol * sigma_max of the k-th unfolding, capped by max_ranks[k-1] when given.
TTTensor tt_svd(const DenseTensor& x, const std::optional<RankVector>& max_ranks = std::nullopt,
                double rel_tol = 1e-14);

/// Cores filled with i.i.d. N(0, 1) in core order, storage order within a core.
TTTensor tt_random(const Shape& shape, const RankVector& ranks, std::uint64_t seed);

/// Kronecker-delta cores whose odd/even matricization contains an identity
/// block of size min(n, r)^{d/2}. TT ranks are (r, 1, r, ..., 1, r).
TTTensor tt_delta_example(std::size_t d, std::size_t n, std::size_t r);

/// Gaussian train whose interior cores G_2 = ... = G_{d-1} are one shared
/// (r, n, r) core. Sampling order: G_1, shared core, G_d.
TTTensor tt_equal_cores_random(std::size_t d, std::size_t n, std::size_t r, std::uint64_t seed);

/// Contracts every mode of a train with one vector (row k of `vectors` for
/// mode k). The first core must have left rank 1; the result has length
/// equal to the right rank of the last core.
std::vector<double> tt_contract(std::span<const Tensor3> cores, const Matrix& vectors);

/// Checks that `cores` chain together with r_0 = 1 and returns the mode sizes.
/// `last_rank` pins the right rank of the last core when non-zero.
std::vector<std::size_t> validate_tt_cores(std::span<const Tensor3> cores, std::size_t last_rank);

// ---------------------------------------------------------------------------
// CP

/// X[i_1..i_d] = sum_alpha prod_k V_k[i_k, alpha]; factor k is n_k x r.
class CPTensor {
 public:
  explicit CPTensor(std::vector<Matrix> factors);

  std::size_t order() const noexcept { return factors_.size(); }
  std::size_t rank() const noexcept { return factors_.front().cols(); }
  Shape shape() const;
  const std::vector<Matrix>& factors() const noexcept { return factors_; }

 private:
  std::vector<Matrix> factors_;
};

double cp_entry(const CPTensor& cp, std::span<const std::size_t> index);
DenseTensor cp_to_dense(const CPTensor& cp, std::size_t max_entries = kDenseCap);
CPTensor cp_random(const Shape& shape, std::size_t rank, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Hierarchical Tucker on a perfect binary tree

/// Perfect binary dimension tree over d = 2^p leaves, stored in heap order:
/// node 0 is the root, node j has children 2j+1 and 2j+2, internal nodes are
/// 0..d-2 and leaf k (mode k, 0-based) is node d-1+k. Leaf k holds an
/// n_k x r matrix U_k; internal node j holds a transfer tensor B_j of dims
/// (r_left, r_right, r_out). The root's r_out is the number of outputs.
struct HTTree {
  std::vector<Matrix> leaves;
  std::vector<Tensor3> transfers;

  std::size_t order() const noexcept { return leaves.size(); }
  std::size_t outputs() const { return transfers.empty() ? leaves.front().cols() : transfers.front().dim2(); }
  /// Output dimension of node j (heap index).
  std::size_t node_rank(std::size_t node) const;
  /// Throws std::invalid_argument unless dims chain up consistently.
  void validate() const;
};

/// An HTTree with a single output at the root.
class HTTensor {
 public:
  explicit HTTensor(HTTree tree);

  std::size_t order() const noexcept { return tree_.order(); }
  Shape shape() const;
  /// Output ranks of non-root nodes, heap order (nodes 1 .. 2d-2).
  RankVector node_ranks() const;
  const HTTree& tree() const noexcept { return tree_; }

 private:
  HTTree tree_;
};

double ht_entry(const HTTensor& ht, std::span<const std::size_t> index);
DenseTensor ht_to_dense(const HTTensor& ht, std::size_t max_entries = kDenseCap);

/// node_ranks has one entry per non-root node in heap order (2d-2 entries).
/// Sampling order: leaves by mode, then transfers from root downward.
HTTensor ht_random(const Shape& shape, const RankVector& node_ranks, std::uint64_t seed);
/// 2d-2 copies of r.
RankVector ht_uniform_ranks(std::size_t d, std::size_t r);

/// Root output vector after feeding row k of `vectors` into leaf k.
std::vector<double> ht_contract(const HTTree& tree, const Matrix& vectors);

bool is_power_of_two(std::size_t d) noexcept;
/// Leaf modes (0-based, inclusive) below heap node `node` of a tree with d leaves.
std::pair<std::size_t, std::size_t> ht_leaf_range(std::size_t node, std::size_t d);

// ---------------------------------------------------------------------------
// Rank extraction

enum class RankKind { tt, ht };

/// Numerical ranks of X^{({1..k}, rest)} for k = 1..d-1 (tt), or of
/// X^{(leaves(node), rest)} for every non-root node in heap order (ht).
RankVector ranks_from_dense(const DenseTensor& x, RankKind kind, double rel_tol = kDefaultRelTol);

}  // namespace ttnet
