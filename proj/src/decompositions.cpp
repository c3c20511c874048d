#include "ttnet/decompositions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ttnet/random.hpp"
#include "ttnet/svd.hpp"

namespace ttnet {

namespace {

void check_cap(const Shape& shape, std::size_t max_entries) {
  if (shape.size() > max_entries) {
    throw std::length_error("dense form of shape " + shape.to_string() + " has " +
                            std::to_string(shape.size()) + " entries, cap is " +
                            std::to_string(max_entries));
  }
}

void check_index(const Shape& shape, std::span<const std::size_t> index) {
  (void)shape.flat_index(index);
}

// v <- v * slice, where slice is core[:, i, :].
std::vector<double> times_slice(const std::vector<double>& v, const Tensor3& core, std::size_t i) {
  std::vector<double> out(core.dim2(), 0.0);
  for (std::size_t a = 0; a < core.dim0(); ++a) {
    const double va = v[a];
    if (va == 0.0) continue;
    for (std::size_t b = 0; b < core.dim2(); ++b) out[b] += va * core(a, i, b);
  }
  return out;
}

// Evaluates the tree bottom-up given each leaf's output vector.
template <typename LeafFn>
std::vector<double> ht_evaluate(const HTTree& tree, LeafFn&& leaf_vector) {
  const std::size_t d = tree.order();
  std::vector<std::vector<double>> node(2 * d - 1);
  for (std::size_t k = 0; k < d; ++k) node[d - 1 + k] = leaf_vector(k);
  for (std::size_t j = d - 1; j-- > 0;) {
    const Tensor3& b = tree.transfers[j];
    const auto& left = node[2 * j + 1];
    const auto& right = node[2 * j + 2];
    std::vector<double> z(b.dim2(), 0.0);
    for (std::size_t x = 0; x < b.dim0(); ++x) {
      if (left[x] == 0.0) continue;
      for (std::size_t y = 0; y < b.dim1(); ++y) {
        const double w = left[x] * right[y];
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < b.dim2(); ++c) z[c] += w * b(x, y, c);
      }
    }
    node[j] = std::move(z);
  }
  return node[0];
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor Train

std::vector<std::size_t> validate_tt_cores(std::span<const Tensor3> cores, std::size_t last_rank) {
  if (cores.empty()) throw std::invalid_argument("tensor train needs at least one core");
  if (cores.front().dim0() != 1) {
    throw std::invalid_argument("first core must have left rank 1, got " +
                                std::to_string(cores.front().dim0()));
  }
  std::vector<std::size_t> modes;
  for (std::size_t k = 0; k < cores.size(); ++k) {
    if (k > 0 && cores[k].dim0() != cores[k - 1].dim2()) {
      throw std::invalid_argument("core " + std::to_string(k + 1) + " has left rank " +
                                  std::to_string(cores[k].dim0()) + " but core " +
                                  std::to_string(k) + " has right rank " +
                                  std::to_string(cores[k - 1].dim2()));
    }
    modes.push_back(cores[k].dim1());
  }
  if (last_rank != 0 && cores.back().dim2() != last_rank) {
    throw std::invalid_argument("last core must have right rank " + std::to_string(last_rank) +
                                ", got " + std::to_string(cores.back().dim2()));
  }
  return modes;
}

TTTensor::TTTensor(std::vector<Tensor3> cores) : cores_(std::move(cores)) {
  validate_tt_cores(cores_, 1);
}

Shape TTTensor::shape() const {
  std::vector<std::size_t> dims;
  for (const auto& c : cores_) dims.push_back(c.dim1());
  return Shape(std::move(dims));
}

RankVector TTTensor::ranks() const {
  RankVector r;
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) r.push_back(cores_[k].dim2());
  return r;
}

double tt_entry(const TTTensor& tt, std::span<const std::size_t> index) {
  check_index(tt.shape(), index);
  std::vector<double> v{1.0};
  for (std::size_t k = 0; k < tt.order(); ++k) v = times_slice(v, tt.cores()[k], index[k]);
  return v[0];
}

DenseTensor tt_to_dense(const TTTensor& tt, std::size_t max_entries) {
  const Shape shape = tt.shape();
  check_cap(shape, max_entries);
  // partial holds the (n_1 ... n_k) x r_k unfolding of the first k cores.
  std::vector<double> partial{1.0};
  std::size_t rows = 1;
  for (const Tensor3& core : tt.cores()) {
    const std::size_t r0 = core.dim0(), n = core.dim1(), r1 = core.dim2();
    std::vector<double> next(rows * n * r1, 0.0);
    for (std::size_t p = 0; p < rows; ++p)
      for (std::size_t a = 0; a < r0; ++a) {
        const double w = partial[p * r0 + a];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t b = 0; b < r1; ++b) next[(p * n + i) * r1 + b] += w * core(a, i, b);
      }
    partial = std::move(next);
    rows *= n;
  }
  return DenseTensor(shape, std::move(partial));
}

TTTensor tt_svd(const DenseTensor& x, const std::optional<RankVector>& max_ranks, double rel_tol) {
  const std::size_t d = x.order();
  const Shape& shape = x.shape();
  if (max_ranks) {
    if (max_ranks->size() + 1 != d) {
      throw std::invalid_argument("max_ranks needs " + std::to_string(d - 1) + " entries, got " +
                                  std::to_string(max_ranks->size()));
    }
    for (auto r : *max_ranks)
      if (r == 0) throw std::invalid_argument("max_ranks entries must be >= 1");
  }

  std::vector<Tensor3> cores;
  std::vector<double> rest(x.data().begin(), x.data().end());
  std::size_t remaining = shape.size();
  std::size_t r_prev = 1;
  for (std::size_t k = 0; k + 1 < d; ++k) {
    const std::size_t n = shape[k];
    const std::size_t rows = r_prev * n;
    remaining /= n;
    const Matrix unfolding(rows, remaining, std::move(rest));
    const SvdResult f = svd(unfolding);

    std::size_t rank = std::max<std::size_t>(count_above(f.singular_values, rel_tol), 1);
    if (max_ranks) rank = std::min(rank, (*max_ranks)[k]);
    rank = std::min(rank, f.singular_values.size());

    Tensor3 core(r_prev, n, rank);
    for (std::size_t a = 0; a < r_prev; ++a)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < rank; ++b) core(a, i, b) = f.u(a * n + i, b);
    cores.push_back(std::move(core));

    rest.assign(rank * remaining, 0.0);
    for (std::size_t b = 0; b < rank; ++b)
      for (std::size_t j = 0; j < remaining; ++j)
        rest[b * remaining + j] = f.singular_values[b] * f.v(j, b);
    r_prev = rank;
  }
  cores.emplace_back(r_prev, shape[d - 1], 1, std::move(rest));
  return TTTensor(std::move(cores));
}

TTTensor tt_random(const Shape& shape, const RankVector& ranks, std::uint64_t seed) {
  const std::size_t d = shape.order();
  if (ranks.size() + 1 != d) {
    throw std::invalid_argument("TT ranks need " + std::to_string(d - 1) + " entries, got " +
                                std::to_string(ranks.size()));
  }
  for (auto r : ranks)
    if (r == 0) throw std::invalid_argument("TT ranks must be >= 1");
  Rng rng(seed);
  std::vector<Tensor3> cores;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t r0 = k == 0 ? 1 : ranks[k - 1];
    const std::size_t r1 = k + 1 == d ? 1 : ranks[k];
    Tensor3 core(r0, shape[k], r1);
    rng.fill_normal(core.data());
    cores.push_back(std::move(core));
  }
  return TTTensor(std::move(cores));
}

TTTensor tt_delta_example(std::size_t d, std::size_t n, std::size_t r) {
  if (d < 2 || d % 2 != 0) {
    throw std::invalid_argument("delta example needs an even order d >= 2, got " + std::to_string(d));
  }
  if (n == 0 || r == 0) throw std::invalid_argument("mode size and rank must be positive");
  std::vector<Tensor3> cores;
  for (std::size_t k = 1; k <= d; ++k) {
    // Odd positions open a bond of size r, even positions close it.
    const bool opens = k % 2 == 1;
    Tensor3 core = opens ? Tensor3(1, n, r) : Tensor3(r, n, 1);
    for (std::size_t i = 0; i < std::min(n, r); ++i) {
      if (opens) core(0, i, i) = 1.0;
      else core(i, i, 0) = 1.0;
    }
    cores.push_back(std::move(core));
  }
  return TTTensor(std::move(cores));
}

TTTensor tt_equal_cores_random(std::size_t d, std::size_t n, std::size_t r, std::uint64_t seed) {
  if (d < 3) throw std::invalid_argument("equal-core train needs d >= 3, got " + std::to_string(d));
  if (n == 0 || r == 0) throw std::invalid_argument("mode size and rank must be positive");
  Rng rng(seed);
  Tensor3 first(1, n, r), shared(r, n, r), last(r, n, 1);
  rng.fill_normal(first.data());
  rng.fill_normal(shared.data());
  rng.fill_normal(last.data());
  std::vector<Tensor3> cores;
  cores.push_back(std::move(first));
  for (std::size_t k = 2; k < d; ++k) cores.push_back(shared);
  cores.push_back(std::move(last));
  return TTTensor(std::move(cores));
}

std::vector<double> tt_contract(std::span<const Tensor3> cores, const Matrix& vectors) {
  if (vectors.rows() != cores.size()) {
    throw std::invalid_argument("train has " + std::to_string(cores.size()) + " modes but " +
                                std::to_string(vectors.rows()) + " vectors were given");
  }
  std::vector<double> h{1.0};
  for (std::size_t k = 0; k < cores.size(); ++k) {
    const Tensor3& g = cores[k];
    if (g.dim1() != vectors.cols()) {
      throw std::invalid_argument("vector length " + std::to_string(vectors.cols()) +
                                  " does not match mode " + std::to_string(k + 1) + " of size " +
                                  std::to_string(g.dim1()));
    }
    auto phi = vectors.row(k);
    std::vector<double> next(g.dim2(), 0.0);
    for (std::size_t a = 0; a < g.dim0(); ++a) {
      const double ha = h[a];
      if (ha == 0.0) continue;
      for (std::size_t i = 0; i < g.dim1(); ++i) {
        const double w = ha * phi[i];
        if (w == 0.0) continue;
        for (std::size_t b = 0; b < g.dim2(); ++b) next[b] += w * g(a, i, b);
      }
    }
    h = std::move(next);
  }
  return h;
}

// ---------------------------------------------------------------------------
// CP

CPTensor::CPTensor(std::vector<Matrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("CP tensor needs at least one factor");
  const std::size_t r = factors_.front().cols();
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (factors_[k].cols() != r) {
      throw std::invalid_argument("factor " + std::to_string(k + 1) + " has " +
                                  std::to_string(factors_[k].cols()) + " columns, expected rank " +
                                  std::to_string(r));
    }
  }
}

Shape CPTensor::shape() const {
  std::vector<std::size_t> dims;
  for (const auto& f : factors_) dims.push_back(f.rows());
  return Shape(std::move(dims));
}

double cp_entry(const CPTensor& cp, std::span<const std::size_t> index) {
  check_index(cp.shape(), index);
  double sum = 0.0;
  for (std::size_t alpha = 0; alpha < cp.rank(); ++alpha) {
    double term = 1.0;
    for (std::size_t k = 0; k < cp.order(); ++k) term *= cp.factors()[k](index[k], alpha);
    sum += term;
  }
  return sum;
}

DenseTensor cp_to_dense(const CPTensor& cp, std::size_t max_entries) {
  const Shape shape = cp.shape();
  check_cap(shape, max_entries);
  const std::size_t r = cp.rank();
  // Row-wise Khatri-Rao product of the factors seen so far.
  std::vector<double> partial(r, 1.0);
  std::size_t rows = 1;
  for (const Matrix& v : cp.factors()) {
    const std::size_t n = v.rows();
    std::vector<double> next(rows * n * r);
    for (std::size_t p = 0; p < rows; ++p)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < r; ++a) next[(p * n + i) * r + a] = partial[p * r + a] * v(i, a);
    partial = std::move(next);
    rows *= n;
  }
  std::vector<double> data(rows, 0.0);
  for (std::size_t p = 0; p < rows; ++p)
    for (std::size_t a = 0; a < r; ++a) data[p] += partial[p * r + a];
  return DenseTensor(shape, std::move(data));
}

CPTensor cp_random(const Shape& shape, std::size_t rank, std::uint64_t seed) {
  if (rank == 0) throw std::invalid_argument("CP rank must be >= 1");
  Rng rng(seed);
  std::vector<Matrix> factors;
  for (std::size_t k = 0; k < shape.order(); ++k) {
    Matrix f(shape[k], rank);
    rng.fill_normal(f.data());
    factors.push_back(std::move(f));
  }
  return CPTensor(std::move(factors));
}

// ---------------------------------------------------------------------------
// Hierarchical Tucker

bool is_power_of_two(std::size_t d) noexcept { return d != 0 && (d & (d - 1)) == 0; }

std::pair<std::size_t, std::size_t> ht_leaf_range(std::size_t node, std::size_t d) {
  if (!is_power_of_two(d)) throw std::invalid_argument("tree needs a power-of-two leaf count");
  if (node >= 2 * d - 1) throw std::out_of_range("node " + std::to_string(node) + " not in tree");
  std::size_t first = node, last = node;
  while (first < d - 1) {
    first = 2 * first + 1;
    last = 2 * last + 2;
  }
  return {first - (d - 1), last - (d - 1)};
}

std::size_t HTTree::node_rank(std::size_t node) const {
  const std::size_t d = order();
  if (node >= 2 * d - 1) throw std::out_of_range("node " + std::to_string(node) + " not in tree");
  return node < d - 1 ? transfers[node].dim2() : leaves[node - (d - 1)].cols();
}

void HTTree::validate() const {
  const std::size_t d = order();
  if (d == 0 || !is_power_of_two(d)) {
    throw std::invalid_argument("hierarchical format needs a power-of-two number of leaves, got " +
                                std::to_string(d));
  }
  if (transfers.size() != d - 1) {
    throw std::invalid_argument("tree with " + std::to_string(d) + " leaves needs " +
                                std::to_string(d - 1) + " transfer tensors, got " +
                                std::to_string(transfers.size()));
  }
  for (std::size_t j = 0; j + 1 < d; ++j) {
    const Tensor3& b = transfers[j];
    if (b.dim0() != node_rank(2 * j + 1) || b.dim1() != node_rank(2 * j + 2)) {
      throw std::invalid_argument("transfer tensor at node " + std::to_string(j) + " has dims (" +
                                  std::to_string(b.dim0()) + "," + std::to_string(b.dim1()) +
                                  ",.) but its children have ranks " +
                                  std::to_string(node_rank(2 * j + 1)) + " and " +
                                  std::to_string(node_rank(2 * j + 2)));
    }
  }
}

HTTensor::HTTensor(HTTree tree) : tree_(std::move(tree)) {
  tree_.validate();
  if (tree_.outputs() != 1) {
    throw std::invalid_argument("root of a hierarchical tensor must have output dimension 1, got " +
                                std::to_string(tree_.outputs()));
  }
}

Shape HTTensor::shape() const {
  std::vector<std::size_t> dims;
  for (const auto& u : tree_.leaves) dims.push_back(u.rows());
  return Shape(std::move(dims));
}

RankVector HTTensor::node_ranks() const {
  RankVector r;
  for (std::size_t j = 1; j < 2 * order() - 1; ++j) r.push_back(tree_.node_rank(j));
  return r;
}

double ht_entry(const HTTensor& ht, std::span<const std::size_t> index) {
  check_index(ht.shape(), index);
  const auto& leaves = ht.tree().leaves;
  auto out = ht_evaluate(ht.tree(), [&](std::size_t k) {
    auto row = leaves[k].row(index[k]);
    return std::vector<double>(row.begin(), row.end());
  });
  return out[0];
}

std::vector<double> ht_contract(const HTTree& tree, const Matrix& vectors) {
  if (vectors.rows() != tree.order()) {
    throw std::invalid_argument("tree has " + std::to_string(tree.order()) + " leaves but " +
                                std::to_string(vectors.rows()) + " vectors were given");
  }
  return ht_evaluate(tree, [&](std::size_t k) {
    const Matrix& u = tree.leaves[k];
    if (u.rows() != vectors.cols()) {
      throw std::invalid_argument("vector length " + std::to_string(vectors.cols()) +
                                  " does not match leaf " + std::to_string(k + 1) + " of size " +
                                  std::to_string(u.rows()));
    }
    auto x = vectors.row(k);
    std::vector<double> v(u.cols(), 0.0);
    for (std::size_t i = 0; i < u.rows(); ++i)
      for (std::size_t a = 0; a < u.cols(); ++a) v[a] += u(i, a) * x[i];
    return v;
  });
}

DenseTensor ht_to_dense(const HTTensor& ht, std::size_t max_entries) {
  const Shape shape = ht.shape();
  check_cap(shape, max_entries);
  const HTTree& tree = ht.tree();
  const std::size_t d = tree.order();
  // node[j] is the (prod of leaf modes) x r_j unfolding of the subtree at j.
  std::vector<Matrix> node(2 * d - 1);
  for (std::size_t k = 0; k < d; ++k) node[d - 1 + k] = tree.leaves[k];
  for (std::size_t j = d - 1; j-- > 0;) {
    const Tensor3& b = tree.transfers[j];
    const Matrix& left = node[2 * j + 1];
    const Matrix& right = node[2 * j + 2];
    const std::size_t nl = left.rows(), nr = right.rows();
    const std::size_t ra = b.dim0(), rb = b.dim1(), rc = b.dim2();
    // tmp[il, y, c] = sum_x left[il, x] B[x, y, c]
    std::vector<double> tmp(nl * rb * rc, 0.0);
    for (std::size_t il = 0; il < nl; ++il)
      for (std::size_t x = 0; x < ra; ++x) {
        const double w = left(il, x);
        if (w == 0.0) continue;
        for (std::size_t yc = 0; yc < rb * rc; ++yc) tmp[il * rb * rc + yc] += w * b.data()[x * rb * rc + yc];
      }
    Matrix out(nl * nr, rc);
    for (std::size_t il = 0; il < nl; ++il)
      for (std::size_t ir = 0; ir < nr; ++ir)
        for (std::size_t y = 0; y < rb; ++y) {
          const double w = right(ir, y);
          if (w == 0.0) continue;
          for (std::size_t c = 0; c < rc; ++c) out(il * nr + ir, c) += w * tmp[(il * rb + y) * rc + c];
        }
    node[j] = std::move(out);
  }
  auto flat = node[0].data();
  return DenseTensor(shape, std::vector<double>(flat.begin(), flat.end()));
}

RankVector ht_uniform_ranks(std::size_t d, std::size_t r) {
  if (!is_power_of_two(d)) throw std::invalid_argument("tree needs a power-of-two leaf count");
  return RankVector(2 * d - 2, r);
}

HTTensor ht_random(const Shape& shape, const RankVector& node_ranks, std::uint64_t seed) {
  const std::size_t d = shape.order();
  if (!is_power_of_two(d)) {
    throw std::invalid_argument("hierarchical format needs a power-of-two order, got " +
                                std::to_string(d));
  }
  if (node_ranks.size() != 2 * d - 2) {
    throw std::invalid_argument("tree with " + std::to_string(d) + " leaves needs " +
                                std::to_string(2 * d - 2) + " node ranks, got " +
                                std::to_string(node_ranks.size()));
  }
  for (auto r : node_ranks)
    if (r == 0) throw std::invalid_argument("node ranks must be >= 1");
  auto rank_of = [&](std::size_t node) { return node == 0 ? std::size_t{1} : node_ranks[node - 1]; };

  Rng rng(seed);
  HTTree tree;
  for (std::size_t k = 0; k < d; ++k) {
    Matrix u(shape[k], rank_of(d - 1 + k));
    rng.fill_normal(u.data());
    tree.leaves.push_back(std::move(u));
  }
  for (std::size_t j = 0; j + 1 < d; ++j) {
    Tensor3 b(rank_of(2 * j + 1), rank_of(2 * j + 2), rank_of(j));
    rng.fill_normal(b.data());
    tree.transfers.push_back(std::move(b));
  }
  return HTTensor(std::move(tree));
}

// ---------------------------------------------------------------------------
// Rank extraction

RankVector ranks_from_dense(const DenseTensor& x, RankKind kind, double rel_tol) {
  const std::size_t d = x.order();
  RankVector ranks;
  if (kind == RankKind::tt) {
    for (std::size_t k = 1; k < d; ++k)
      ranks.push_back(numerical_rank(matricize(x, AxisSplit::prefix(k, d)), rel_tol));
    return ranks;
  }
  if (!is_power_of_two(d) || d < 2) {
    throw std::invalid_argument("hierarchical ranks need a power-of-two order >= 2, got " +
                                std::to_string(d));
  }
  for (std::size_t node = 1; node < 2 * d - 1; ++node) {
    const auto [first, last] = ht_leaf_range(node, d);
    ranks.push_back(numerical_rank(matricize(x, AxisSplit::range(first + 1, last + 1, d)), rel_tol));
  }
  return ranks;
}

}  // namespace ttnet
