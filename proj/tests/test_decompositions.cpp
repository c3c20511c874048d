#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ttnet/decompositions.hpp"
#include "ttnet/svd.hpp"

using namespace ttnet;

namespace {

TTTensor hand_tt() {
  // G_1 slices [1], [2]; G_2 slices [3], [4].
  return TTTensor({Tensor3(1, 2, 1, {1, 2}), Tensor3(1, 2, 1, {3, 4})});
}

DenseTensor rank_one(const std::vector<std::vector<double>>& vs) {
  std::vector<std::size_t> dims;
  for (const auto& v : vs) dims.push_back(v.size());
  DenseTensor x{Shape(dims)};
  oracle::for_each_index(dims, [&](const std::vector<std::size_t>& idx) {
    double p = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) p *= vs[k][idx[k]];
    x.at(idx) = p;
  });
  return x;
}

double diff_norm(const DenseTensor& a, const DenseTensor& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

bool all_leq(const RankVector& a, const RankVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > b[k]) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor Train

TEST(TTTensor, ValidatesBoundaryRanks) {
  EXPECT_THROW(TTTensor({Tensor3(2, 2, 1)}), std::invalid_argument);
  EXPECT_THROW(TTTensor({Tensor3(1, 2, 2)}), std::invalid_argument);
  EXPECT_THROW(TTTensor({Tensor3(1, 2, 2), Tensor3(3, 2, 1)}), std::invalid_argument);
  EXPECT_THROW(TTTensor({}), std::invalid_argument);
}

TEST(TTEntry, HandMatrixProduct) {
  const TTTensor tt = hand_tt();
  const double want[2][2] = {{3, 4}, {6, 8}};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const std::vector<std::size_t> idx{i, j};
      EXPECT_EQ(tt_entry(tt, idx), want[i][j]);
    }
  const std::vector<std::size_t> bad{2, 0};
  EXPECT_THROW(tt_entry(tt, bad), std::out_of_range);
}

TEST(TTEntry, ZeroCores) {
  const TTTensor tt({Tensor3(1, 3, 2), Tensor3(2, 3, 2), Tensor3(2, 3, 1)});
  oracle::for_each_index({3, 3, 3}, [&](const std::vector<std::size_t>& idx) { EXPECT_EQ(tt_entry(tt, idx), 0.0); });
}

TEST(TTEntry, DeltaExampleOrigin) {
  for (std::size_t d : {2, 4, 6}) {
    const std::vector<std::size_t> zero(d, 0);
    EXPECT_EQ(tt_entry(tt_delta_example(d, 3, 2), zero), 1.0);
  }
}

TEST(TTToDense, HandExample) {
  const DenseTensor x = tt_to_dense(hand_tt());
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()), (std::vector<double>{3, 4, 6, 8}));
}

TEST(TTToDense, RankOneIsOuterProduct) {
  const std::vector<std::vector<double>> vs{{1, -2}, {0.5, 3, 1}, {2, 7}};
  std::vector<Tensor3> cores;
  for (const auto& v : vs) cores.emplace_back(1, v.size(), 1, v);
  const DenseTensor x = tt_to_dense(TTTensor(cores));
  const DenseTensor want = rank_one(vs);
  EXPECT_EQ(diff_norm(x, want), 0.0);
}

TEST(TTToDense, DeltaExampleClosedForm) {
  const DenseTensor x = tt_to_dense(tt_delta_example(4, 2, 2));
  oracle::for_each_index({2, 2, 2, 2}, [&](const std::vector<std::size_t>& i) {
    EXPECT_EQ(x.at(i), (i[0] == i[1] && i[2] == i[3]) ? 1.0 : 0.0);
  });
}

TEST(TTToDense, DeltaExampleMatchesClosedFormWhenRankBelowModeSize) {
  // n = 3 > r = 2: deltas vanish once an index reaches r.
  const std::size_t d = 6, n = 3, r = 2;
  const DenseTensor x = tt_to_dense(tt_delta_example(d, n, r));
  oracle::for_each_index(std::vector<std::size_t>(d, n), [&](const std::vector<std::size_t>& i) {
    double want = 1.0;
    for (std::size_t k = 0; k < d; k += 2) want *= (i[k] == i[k + 1] && i[k] < r) ? 1.0 : 0.0;
    EXPECT_EQ(x.at(i), want);
  });
}

TEST(TTToDense, EntrywiseAgreementWithTTEntry) {
  const TTTensor tt = tt_random(Shape{3, 2, 4, 2}, {2, 3, 2}, 5);
  const DenseTensor x = tt_to_dense(tt);
  oracle::for_each_index({3, 2, 4, 2}, [&](const std::vector<std::size_t>& idx) {
    EXPECT_LE(std::abs(x.at(idx) - tt_entry(tt, idx)), 1e-13 * std::max(1.0, std::abs(x.at(idx))));
  });
}

TEST(TTToDense, CapExceeded) {
  const TTTensor tt = tt_random(Shape{10, 10, 10}, {1, 1}, 1);
  EXPECT_THROW(tt_to_dense(tt, 999), std::length_error);
  EXPECT_NO_THROW(tt_to_dense(tt, 1000));
}

TEST(TTSvd, Examples) {
  const DenseTensor a(Shape{2, 2}, {3, 4, 6, 8});
  const TTTensor ta = tt_svd(a);
  EXPECT_EQ(ta.ranks(), RankVector{1});
  EXPECT_LE(diff_norm(tt_to_dense(ta), a), 1e-14 * 10.0);

  const DenseTensor eye(Shape{2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(tt_svd(eye).ranks(), RankVector{2});

  const TTTensor td = tt_svd(tt_to_dense(tt_delta_example(4, 2, 2)));
  EXPECT_EQ(td.ranks(), (RankVector{2, 1, 2}));
}

TEST(TTSvd, ReconstructsRandomDenseTensors) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseTensor x = oracle::random_dense(Shape{3, 4, 2, 3}, rng);
    const TTTensor tt = tt_svd(x);
    EXPECT_LE(diff_norm(tt_to_dense(tt), x), 1e-10 * std::sqrt(inner_product(x, x)));
  }
}

TEST(TTSvd, RanksAreBoundedByGeneratingRanks) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 3 + rng.index(4);  // 3..6
    const std::size_t n = 2 + rng.index(3), r = 1 + rng.index(4);
    if (std::pow(static_cast<double>(n), static_cast<double>(d)) > 5000) continue;
    const Shape shape(std::vector<std::size_t>(d, n));
    const RankVector ranks(d - 1, r);
    const TTTensor tt = tt_random(shape, ranks, 100 + trial);
    const TTTensor back = tt_svd(tt_to_dense(tt), std::nullopt, 1e-10);
    EXPECT_TRUE(all_leq(back.ranks(), ranks));
  }
}

TEST(TTSvd, MaxRanksCap) {
  Rng rng(2);
  const DenseTensor x = oracle::random_dense(Shape{3, 3, 3, 3}, rng);
  const TTTensor tt = tt_svd(x, RankVector{2, 2, 2});
  EXPECT_TRUE(all_leq(tt.ranks(), RankVector{2, 2, 2}));
}

TEST(TTRandom, DeterministicAndRankBounded) {
  const Shape shape{2, 2, 2, 2};
  const TTTensor a = tt_random(shape, {2, 2, 2}, 42), b = tt_random(shape, {2, 2, 2}, 42);
  for (std::size_t k = 0; k < a.order(); ++k) EXPECT_EQ(a.cores()[k], b.cores()[k]);
  EXPECT_NE(a.cores()[0], tt_random(shape, {2, 2, 2}, 43).cores()[0]);
  EXPECT_TRUE(all_leq(ranks_from_dense(tt_to_dense(a), RankKind::tt), RankVector{2, 2, 2}));
}

TEST(TTRandom, UnitRanksAreSeparable) {
  const DenseTensor x = tt_to_dense(tt_random(Shape{3, 2, 3, 2}, {1, 1, 1}, 9));
  for (const auto& rows : {std::vector<std::size_t>{1}, {2}, {1, 3}, {2, 4}, {1, 2, 3}}) {
    EXPECT_EQ(numerical_rank(matricize(x, AxisSplit(rows, 4))), 1u);
  }
}

TEST(TTDelta, OddEvenMatricization) {
  EXPECT_EQ(matricize(tt_to_dense(tt_delta_example(4, 2, 2)), AxisSplit::odd_even(4)), Matrix::identity(4));
  EXPECT_EQ(numerical_rank(matricize(tt_to_dense(tt_delta_example(6, 3, 2)), AxisSplit::odd_even(6))), 8u);
  EXPECT_EQ(tt_to_dense(tt_delta_example(2, 2, 2)).data().size(), 4u);
  const DenseTensor base = tt_to_dense(tt_delta_example(2, 2, 2));
  EXPECT_EQ(std::vector<double>(base.data().begin(), base.data().end()), (std::vector<double>{1, 0, 0, 1}));
}

TEST(TTDelta, RanksAndCoreDims) {
  const TTTensor tt = tt_delta_example(6, 3, 2);
  EXPECT_EQ(tt.ranks(), (RankVector{2, 1, 2, 1, 2}));
  EXPECT_THROW(tt_delta_example(5, 2, 2), std::invalid_argument);
  EXPECT_THROW(tt_delta_example(0, 2, 2), std::invalid_argument);
}

TEST(TTEqualCores, InteriorCoresIdentical) {
  const TTTensor tt = tt_equal_cores_random(6, 3, 3, 77);
  for (std::size_t k = 2; k + 1 < tt.order(); ++k) EXPECT_EQ(tt.cores()[k], tt.cores()[1]);
  EXPECT_EQ(tt.cores()[0].dim0(), 1u);
  EXPECT_EQ(tt.cores().back().dim2(), 1u);
  const TTTensor again = tt_equal_cores_random(6, 3, 3, 77);
  for (std::size_t k = 0; k < tt.order(); ++k) EXPECT_EQ(tt.cores()[k], again.cores()[k]);
  EXPECT_THROW(tt_equal_cores_random(2, 3, 3, 1), std::invalid_argument);
}

TEST(TTEqualCores, OddEvenRankReachesBound) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseTensor x = tt_to_dense(tt_equal_cores_random(6, 3, 3, seed));
    EXPECT_EQ(numerical_rank(matricize(x, AxisSplit::odd_even(6)), 1e-13), 27u) << "seed " << seed;
  }
}

// ---------------------------------------------------------------------------
// CP

TEST(CPToDense, Examples) {
  const CPTensor a({Matrix(2, 1, {1, 2}), Matrix(2, 1, {3, 4})});
  const DenseTensor x = cp_to_dense(a);
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()), (std::vector<double>{3, 4, 6, 8}));

  const CPTensor zero({Matrix(2, 2, {1, 2, 3, 4}), Matrix(3, 2)});
  const DenseTensor z = cp_to_dense(zero);
  for (double v : z.data()) EXPECT_EQ(v, 0.0);

  const CPTensor id({Matrix::identity(2), Matrix::identity(2)});
  const DenseTensor e = cp_to_dense(id);
  EXPECT_EQ(std::vector<double>(e.data().begin(), e.data().end()), (std::vector<double>{1, 0, 0, 1}));
}

TEST(CPTensor, FactorsMustShareRank) {
  EXPECT_THROW(CPTensor({Matrix(2, 2), Matrix(2, 3)}), std::invalid_argument);
}

TEST(CPEntry, AgreesWithDense) {
  const CPTensor cp = cp_random(Shape{2, 3, 2}, 3, 8);
  const DenseTensor x = cp_to_dense(cp);
  oracle::for_each_index({2, 3, 2}, [&](const std::vector<std::size_t>& idx) {
    EXPECT_LE(std::abs(cp_entry(cp, idx) - x.at(idx)), 1e-13 * std::max(1.0, std::abs(x.at(idx))));
  });
}

TEST(CPRandom, DeterministicAndLemmaBound) {
  const Shape shape{3, 3, 3, 3};
  const CPTensor a = cp_random(shape, 2, 5), b = cp_random(shape, 2, 5);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(a.factors()[k], b.factors()[k]);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t r = 1 + seed % 3;
    const DenseTensor x = cp_to_dense(cp_random(shape, r, seed));
    for (const auto& rows : {std::vector<std::size_t>{1}, {2}, {1, 2}, {1, 3}, {2, 4}, {1, 2, 3}}) {
      const std::size_t rank = numerical_rank(matricize(x, AxisSplit(rows, 4)));
      EXPECT_LE(rank, r);
      if (r == 1) {
        EXPECT_EQ(rank, 1u);
      }
    }
    for (std::size_t tt_rank : ranks_from_dense(x, RankKind::tt)) EXPECT_LE(tt_rank, r);
  }
}

// ---------------------------------------------------------------------------
// Hierarchical Tucker

TEST(HTToDense, IdentityAssembly) {
  HTTree tree;
  tree.leaves = {Matrix::identity(2), Matrix::identity(2)};
  tree.transfers = {Tensor3(2, 2, 1, {1, 0, 0, 1})};
  const DenseTensor x = ht_to_dense(HTTensor(tree));
  EXPECT_EQ(std::vector<double>(x.data().begin(), x.data().end()), (std::vector<double>{1, 0, 0, 1}));
}

TEST(HTToDense, UnitLeafRanksAreSeparable) {
  const HTTensor ht = ht_random(Shape{2, 3, 2, 3}, {1, 1, 1, 1, 1, 1}, 4);
  const DenseTensor x = ht_to_dense(ht);
  for (const auto& rows : {std::vector<std::size_t>{1}, {2}, {1, 3}, {1, 2}, {2, 3, 4}}) {
    EXPECT_EQ(numerical_rank(matricize(x, AxisSplit(rows, 4))), 1u);
  }
}

TEST(HTToDense, EntryAgreementAndBoundedPrefixRanks) {
  const HTTensor ht = ht_random(Shape{3, 3, 3, 3}, ht_uniform_ranks(4, 2), 10);
  const DenseTensor x = ht_to_dense(ht);
  oracle::for_each_index({3, 3, 3, 3}, [&](const std::vector<std::size_t>& idx) {
    EXPECT_LE(std::abs(ht_entry(ht, idx) - x.at(idx)), 1e-13 * std::max(1.0, std::abs(x.at(idx))));
  });
  for (std::size_t r : ranks_from_dense(x, RankKind::tt)) EXPECT_LE(r, 2u);
  for (std::size_t r : ranks_from_dense(x, RankKind::ht)) EXPECT_LE(r, 2u);
}

TEST(HTTensor, Validation) {
  HTTree tree;
  tree.leaves = {Matrix::identity(2), Matrix::identity(2), Matrix::identity(2)};
  EXPECT_THROW(tree.validate(), std::invalid_argument);
  HTTree bad;
  bad.leaves = {Matrix::identity(2), Matrix::identity(3)};
  bad.transfers = {Tensor3(2, 2, 1)};
  EXPECT_THROW(HTTensor{bad}, std::invalid_argument);
  HTTree two_outputs;
  two_outputs.leaves = {Matrix::identity(2), Matrix::identity(2)};
  two_outputs.transfers = {Tensor3(2, 2, 2)};
  EXPECT_THROW(HTTensor{two_outputs}, std::invalid_argument);
}

TEST(HTRandom, DeterministicZeroRootAndFiniteAtDepthThree) {
  const Shape shape{2, 2, 2, 2, 2, 2, 2, 2};
  const HTTensor a = ht_random(shape, ht_uniform_ranks(8, 2), 3), b = ht_random(shape, ht_uniform_ranks(8, 2), 3);
  EXPECT_EQ(a.tree().transfers[0], b.tree().transfers[0]);
  EXPECT_EQ(a.tree().leaves[7], b.tree().leaves[7]);
  const DenseTensor x = ht_to_dense(a);
  for (double v : x.data()) EXPECT_TRUE(std::isfinite(v));

  HTTree zero = a.tree();
  for (double& v : zero.transfers[0].data()) v = 0.0;
  for (double v : ht_to_dense(HTTensor(zero)).data()) EXPECT_EQ(v, 0.0);
}

TEST(HTHelpers, LeafRangesAndPowersOfTwo) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_TRUE(is_power_of_two(8));
  EXPECT_FALSE(is_power_of_two(6));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_EQ(ht_leaf_range(0, 4), (std::pair<std::size_t, std::size_t>{0, 3}));
  EXPECT_EQ(ht_leaf_range(2, 4), (std::pair<std::size_t, std::size_t>{2, 3}));
  EXPECT_EQ(ht_leaf_range(5, 4), (std::pair<std::size_t, std::size_t>{2, 2}));
}

// ---------------------------------------------------------------------------
// Rank extraction

TEST(RanksFromDense, Examples) {
  const DenseTensor one = rank_one({{1, 2}, {3, -1, 2}, {0.5, 4}});
  EXPECT_EQ(ranks_from_dense(one, RankKind::tt), (RankVector{1, 1}));
  EXPECT_EQ(ranks_from_dense(tt_to_dense(tt_delta_example(4, 2, 2)), RankKind::tt), (RankVector{2, 1, 2}));
  const DenseTensor x = tt_to_dense(tt_random(Shape{2, 2, 2, 2}, {2, 2, 2}, 17));
  EXPECT_TRUE(all_leq(ranks_from_dense(x, RankKind::tt), RankVector{2, 2, 2}));
}

TEST(RanksFromDense, HTNodeOrderIsHeapOrder) {
  // delta pairs (1,2)(3,4): node 1 covers modes 1-2 (rank 1), node 2 covers modes 3-4 (rank 1), leaves rank 2.
  const DenseTensor x = tt_to_dense(tt_delta_example(4, 2, 2));
  EXPECT_EQ(ranks_from_dense(x, RankKind::ht), (RankVector{1, 1, 2, 2, 2, 2}));
  EXPECT_THROW(ranks_from_dense(DenseTensor(Shape{2, 2, 2}), RankKind::ht), std::invalid_argument);
}
