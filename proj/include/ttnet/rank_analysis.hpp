#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ttnet/decompositions.hpp"
#include "ttnet/tensor_core.hpp"

namespace ttnet {

/// Singular-value cutoff for the Monte-Carlo certificates. Random TT products
/// are full rank but ill conditioned: genuine singular values reach ~1e-12 sigma_max,
/// while roundoff in truly rank-deficient samples stays near 1e-16 sigma_max.
inline constexpr double kCertificateRelTol = 1e-13;

struct SampleOutcome {
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::size_t observed_rank = 0;
  bool pass = false;
};

/// Result of checking rank X^{(odd, even)} >= q^{d/2} over a batch of samples.
struct SeparationReport {
  std::size_t d = 0, n = 0, r = 0, q = 0;
  std::size_t threshold = 0;  // q^{d/2}
  double rel_tol = kCertificateRelTol;
  std::vector<SampleOutcome> samples;

  std::size_t num_samples() const noexcept { return samples.size(); }
  std::size_t num_satisfying() const noexcept;
  bool all_pass() const noexcept { return num_satisfying() == num_samples(); }
};

enum class BoundDirection { tt_to_ht, ht_to_tt };

/// Result of checking one of the TT/HT rank conversion bounds.
struct BoundReport {
  BoundDirection direction = BoundDirection::tt_to_ht;
  std::size_t d = 0, n = 0, r = 0;
  std::size_t bound = 0;
  double rel_tol = kCertificateRelTol;
  /// observed_rank is the largest rank of the target format in that sample.
  std::vector<SampleOutcome> samples;

  std::size_t max_observed() const noexcept;
  std::size_t violations() const noexcept;
};

std::string to_string(BoundDirection direction);
BoundDirection parse_bound_direction(const std::string& text);

/// Integer power with overflow check.
std::size_t ipow(std::size_t base, std::size_t exponent);

/// max over splits of rank X^{(s,t)}; a lower bound on the CP rank of x.
std::size_t cp_rank_lower_bound(const DenseTensor& x, std::span<const AxisSplit> splits,
                                double rel_tol = kDefaultRelTol);

/// Samples Gaussian TT tensors with uniform ranks r and checks the odd/even
/// matricization rank against min(n, r)^{d/2}. d must be even.
SeparationReport verify_theorem1(std::size_t d, std::size_t n, std::size_t r,
                                 std::size_t num_samples, std::uint64_t seed,
                                 double rel_tol = kCertificateRelTol);

/// The same check on the deterministic delta-core tensor (one sample, seed 0).
SeparationReport certify_delta_example(std::size_t d, std::size_t n, std::size_t r,
                                       double rel_tol = kCertificateRelTol);

/// One report per (n, r) cell, n outer and r inner, for equal-interior-core
/// trains. Empty when samples_per_cell is 0.
std::vector<SeparationReport> verify_hypothesis1(std::size_t d, std::span<const std::size_t> n_values,
                                                 std::span<const std::size_t> r_values,
                                                 std::size_t samples_per_cell, std::uint64_t seed,
                                                 double rel_tol = kCertificateRelTol);

/// tt_to_ht: Gaussian TT with ranks r, HT ranks must stay <= r^2.
/// ht_to_tt: Gaussian HT with node ranks r, TT ranks must stay <= r^ceil(log2(d)/2).
/// d must be a power of two >= 2.
BoundReport verify_ht_tt_bounds(std::size_t d, std::size_t n, std::size_t r, std::size_t num_samples,
                                std::uint64_t seed, BoundDirection direction,
                                double rel_tol = kCertificateRelTol);

/// Header: sample,seed,d,n,r,q,threshold,observed_rank,pass
void write_csv(std::ostream& out, const SeparationReport& report, bool header = true);
void write_csv(std::ostream& out, std::span<const SeparationReport> reports);
/// Header: sample,seed,direction,d,n,r,bound,observed_rank,pass
void write_csv(std::ostream& out, const BoundReport& report);

}  // namespace ttnet
