#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "ttnet/rank_analysis.hpp"
#include "ttnet/svd.hpp"

using namespace ttnet;

namespace {

std::vector<AxisSplit> all_splits(std::size_t d) {
  // Every non-trivial s containing axis 1 (complements give the same rank).
  std::vector<AxisSplit> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (d - 1)); ++mask) {
    std::vector<std::size_t> rows{1};
    for (std::size_t a = 2; a <= d; ++a)
      if (mask & (std::size_t{1} << (a - 2))) rows.push_back(a);
    if (rows.size() < d) out.emplace_back(rows, d);
  }
  return out;
}

std::string csv_of(const SeparationReport& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

}  // namespace

TEST(Ipow, ValuesAndOverflow) {
  EXPECT_EQ(ipow(3, 3), 27u);
  EXPECT_EQ(ipow(7, 0), 1u);
  EXPECT_THROW(ipow(2, 64), std::overflow_error);
}

TEST(CpRankLowerBound, Examples) {
  const std::vector<AxisSplit> odd_even{AxisSplit::odd_even(4)};
  EXPECT_EQ(cp_rank_lower_bound(tt_to_dense(tt_delta_example(4, 2, 2)), odd_even), 4u);

  const DenseTensor one = cp_to_dense(cp_random(Shape{2, 3, 2, 2}, 1, 3));
  EXPECT_EQ(cp_rank_lower_bound(one, all_splits(4)), 1u);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseTensor x = tt_to_dense(tt_random(Shape{2, 2, 2, 2}, {2, 2, 2}, seed));
    // Oracle: the same matricization, ranked directly.
    const std::size_t want = numerical_rank(matricize(x, odd_even[0]));
    EXPECT_EQ(want, 4u) << "seed " << seed;
    EXPECT_EQ(cp_rank_lower_bound(x, odd_even), want);
  }
}

TEST(CpRankLowerBound, NeverExceedsConstructedRank) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t r = 1 + seed % 4;
    const DenseTensor x = cp_to_dense(cp_random(Shape{3, 3, 3, 3}, r, seed));
    EXPECT_LE(cp_rank_lower_bound(x, all_splits(4)), r);
  }
}

TEST(VerifyTheorem1, Examples) {
  const SeparationReport big = verify_theorem1(6, 3, 3, 100, 1);
  EXPECT_EQ(big.threshold, 27u);
  EXPECT_EQ(big.num_satisfying(), 100u);

  const SeparationReport base = verify_theorem1(2, 2, 2, 10, 2);
  EXPECT_EQ(base.threshold, 2u);
  for (const auto& s : base.samples) {
    const TTTensor tt = tt_random(Shape{2, 2}, {2}, s.seed);
    const std::size_t rank = numerical_rank(matricize(tt_to_dense(tt), AxisSplit::odd_even(2)), kCertificateRelTol);
    EXPECT_EQ(s.observed_rank, rank);
    EXPECT_EQ(s.pass, rank >= 2);
  }

  const SeparationReport mid = verify_theorem1(4, 2, 3, 50, 3);
  EXPECT_EQ(mid.q, 2u);
  EXPECT_EQ(mid.threshold, 4u);
  EXPECT_EQ(mid.num_satisfying(), 50u);
}

TEST(VerifyTheorem1, RejectsOddOrder) {
  EXPECT_THROW(verify_theorem1(5, 2, 2, 1, 0), std::invalid_argument);
}

TEST(VerifyTheorem1, SampleSeedsReproduceObservedRanks) {
  const SeparationReport rep = verify_theorem1(4, 3, 2, 8, 42);
  for (const auto& s : rep.samples) {
    const DenseTensor x = tt_to_dense(tt_random(Shape{3, 3, 3, 3}, {2, 2, 2}, s.seed));
    EXPECT_EQ(s.observed_rank, numerical_rank(matricize(x, AxisSplit::odd_even(4)), kCertificateRelTol));
  }
}

TEST(CertificateTolerance, IllConditionedSampleIsFullRank) {
  // Smallest singular value of this sample is ~1.2e-9 sigma_max; a 1e-8 cutoff reports 25.
  const DenseTensor x = tt_to_dense(tt_random(Shape(std::vector<std::size_t>(6, 3)), RankVector(5, 3),
                                              6038094601263162090ULL));
  const Matrix m = matricize(x, AxisSplit::odd_even(6));
  EXPECT_EQ(numerical_rank(m, kCertificateRelTol), 27u);
  EXPECT_EQ(numerical_rank(m, 1e-8), 25u);
}

TEST(CertificateTolerance, RoundoffStaysBelowCutoff) {
  // TT ranks 2 bound every HT rank by 4 although the node matricizations are up to 9x9.
  const BoundReport rep = verify_ht_tt_bounds(4, 3, 2, 100, 11, BoundDirection::tt_to_ht);
  EXPECT_EQ(rep.violations(), 0u);
  const BoundReport back = verify_ht_tt_bounds(8, 2, 2, 20, 12, BoundDirection::ht_to_tt);
  EXPECT_EQ(back.violations(), 0u);
}

TEST(CertifyDeltaExample, ExactThresholdForSmallCases) {
  for (std::size_t d : {4, 6})
    for (std::size_t n : {2, 3})
      for (std::size_t r : {2, 3}) {
        const SeparationReport rep = certify_delta_example(d, n, r);
        ASSERT_EQ(rep.samples.size(), 1u);
        EXPECT_EQ(rep.samples[0].observed_rank, rep.threshold) << d << ' ' << n << ' ' << r;
        EXPECT_EQ(rep.threshold, ipow(std::min(n, r), d / 2));
      }
}

TEST(VerifyHypothesis1, Examples) {
  const std::vector<std::size_t> two{2};
  const auto cell = verify_hypothesis1(4, two, two, 20, 5);
  ASSERT_EQ(cell.size(), 1u);
  EXPECT_EQ(cell[0].threshold, 4u);
  EXPECT_TRUE(cell[0].all_pass());

  EXPECT_TRUE(verify_hypothesis1(6, two, two, 0, 5).empty());
  EXPECT_THROW(verify_hypothesis1(5, two, two, 1, 5), std::invalid_argument);
}

TEST(VerifyHypothesis1, CellOrderIsNOuterROuter) {
  const std::vector<std::size_t> ns{2, 3}, rs{2, 3};
  const auto reps = verify_hypothesis1(4, ns, rs, 2, 9);
  ASSERT_EQ(reps.size(), 4u);
  EXPECT_EQ(reps[1].n, 2u);
  EXPECT_EQ(reps[1].r, 3u);
  EXPECT_EQ(reps[2].n, 3u);
  EXPECT_EQ(reps[2].r, 2u);
}

TEST(VerifyHtTtBounds, Examples) {
  const BoundReport to_ht = verify_ht_tt_bounds(4, 3, 2, 20, 1, BoundDirection::tt_to_ht);
  EXPECT_EQ(to_ht.bound, 4u);
  EXPECT_LE(to_ht.max_observed(), 4u);
  EXPECT_EQ(to_ht.violations(), 0u);

  const BoundReport to_tt = verify_ht_tt_bounds(4, 3, 2, 20, 1, BoundDirection::ht_to_tt);
  EXPECT_EQ(to_tt.bound, 2u);
  EXPECT_LE(to_tt.max_observed(), 2u);
  EXPECT_EQ(to_tt.violations(), 0u);

  for (auto dir : {BoundDirection::tt_to_ht, BoundDirection::ht_to_tt}) {
    const BoundReport one = verify_ht_tt_bounds(4, 2, 1, 5, 3, dir);
    for (const auto& s : one.samples) EXPECT_EQ(s.observed_rank, 1u);
  }
  EXPECT_THROW(verify_ht_tt_bounds(6, 2, 2, 1, 0, BoundDirection::tt_to_ht), std::invalid_argument);
}

TEST(VerifyHtTtBounds, ViolationsCountSamplesAboveBound) {
  BoundReport rep;
  rep.bound = 4;
  rep.samples = {{0, 0, 3, true}, {1, 0, 5, false}, {2, 0, 4, true}, {3, 0, 9, false}};
  EXPECT_EQ(rep.violations(), 2u);
  EXPECT_EQ(rep.max_observed(), 9u);
}

TEST(BoundDirection, ParseRoundTrip) {
  for (auto dir : {BoundDirection::tt_to_ht, BoundDirection::ht_to_tt})
    EXPECT_EQ(parse_bound_direction(to_string(dir)), dir);
  EXPECT_THROW(parse_bound_direction("sideways"), std::invalid_argument);
}

TEST(Reports, DeterministicCsv) {
  EXPECT_EQ(csv_of(verify_theorem1(4, 2, 2, 10, 77)), csv_of(verify_theorem1(4, 2, 2, 10, 77)));
  EXPECT_NE(csv_of(verify_theorem1(4, 3, 3, 10, 77)), csv_of(verify_theorem1(4, 3, 3, 10, 78)));
  const std::string csv = csv_of(certify_delta_example(4, 2, 2));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample,seed,d,n,r,q,threshold,observed_rank,pass");
}

TEST(Reports, SatisfyingNeverExceedsSamples) {
  const SeparationReport rep = verify_theorem1(4, 4, 1, 5, 0);
  EXPECT_LE(rep.num_satisfying(), rep.num_samples());
  EXPECT_EQ(rep.threshold, 1u);
}
