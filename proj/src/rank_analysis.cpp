#include "ttnet/rank_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ttnet/random.hpp"
#include "ttnet/svd.hpp"

namespace ttnet {

namespace {

void require_even(std::size_t d) {
  if (d < 2 || d % 2 != 0) {
    throw std::invalid_argument("d must be even and >= 2, got " + std::to_string(d));
  }
}

void require_positive(std::size_t n, std::size_t r) {
  if (n == 0 || r == 0) throw std::invalid_argument("n and r must be positive");
}

SeparationReport make_separation_report(std::size_t d, std::size_t n, std::size_t r, double rel_tol) {
  SeparationReport report;
  report.d = d;
  report.n = n;
  report.r = r;
  report.q = std::min(n, r);
  report.threshold = ipow(report.q, d / 2);
  report.rel_tol = rel_tol;
  return report;
}

SampleOutcome odd_even_outcome(const TTTensor& tt, std::size_t sample, std::uint64_t seed,
                               std::size_t threshold, double rel_tol) {
  const DenseTensor x = tt_to_dense(tt);
  const Matrix m = matricize(x, AxisSplit::odd_even(x.order()));
  SampleOutcome out;
  out.sample = sample;
  out.seed = seed;
  out.observed_rank = numerical_rank(m, rel_tol);
  out.pass = out.observed_rank >= threshold;
  return out;
}

std::size_t ceil_half_log2(std::size_t d) {
  std::size_t p = 0;
  while ((std::size_t{1} << p) < d) ++p;
  return (p + 1) / 2;
}

}  // namespace

std::size_t SeparationReport::num_satisfying() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const SampleOutcome& s) { return s.pass; }));
}

std::size_t BoundReport::max_observed() const noexcept {
  std::size_t m = 0;
  for (const auto& s : samples) m = std::max(m, s.observed_rank);
  return m;
}

std::size_t BoundReport::violations() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const SampleOutcome& s) { return !s.pass; }));
}

std::string to_string(BoundDirection direction) {
  return direction == BoundDirection::tt_to_ht ? "tt2ht" : "ht2tt";
}

BoundDirection parse_bound_direction(const std::string& text) {
  if (text == "tt2ht") return BoundDirection::tt_to_ht;
  if (text == "ht2tt") return BoundDirection::ht_to_tt;
  throw std::invalid_argument("direction must be tt2ht or ht2tt, got '" + text + "'");
}

std::size_t ipow(std::size_t base, std::size_t exponent) {
  std::size_t result = 1;
  for (std::size_t k = 0; k < exponent; ++k) {
    if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base) {
      throw std::overflow_error("integer power overflows");
    }
    result *= base;
  }
  return result;
}

std::size_t cp_rank_lower_bound(const DenseTensor& x, std::span<const AxisSplit> splits, double rel_tol) {
  std::size_t best = 0;
  for (const auto& split : splits) best = std::max(best, numerical_rank(matricize(x, split), rel_tol));
  return best;
}

SeparationReport verify_theorem1(std::size_t d, std::size_t n, std::size_t r, std::size_t num_samples,
                                 std::uint64_t seed, double rel_tol) {
  require_even(d);
  require_positive(n, r);
  SeparationReport report = make_separation_report(d, n, r, rel_tol);
  const Shape shape(std::vector<std::size_t>(d, n));
  const RankVector ranks(d - 1, r);
  for (std::size_t s = 0; s < num_samples; ++s) {
    const std::uint64_t sample_seed = derive_seed(seed, s);
    report.samples.push_back(
        odd_even_outcome(tt_random(shape, ranks, sample_seed), s, sample_seed, report.threshold, rel_tol));
  }
  return report;
}

SeparationReport certify_delta_example(std::size_t d, std::size_t n, std::size_t r, double rel_tol) {
  require_even(d);
  require_positive(n, r);
  SeparationReport report = make_separation_report(d, n, r, rel_tol);
  report.samples.push_back(odd_even_outcome(tt_delta_example(d, n, r), 0, 0, report.threshold, rel_tol));
  return report;
}

std::vector<SeparationReport> verify_hypothesis1(std::size_t d, std::span<const std::size_t> n_values,
                                                 std::span<const std::size_t> r_values,
                                                 std::size_t samples_per_cell, std::uint64_t seed,
                                                 double rel_tol) {
  require_even(d);
  if (d < 4) throw std::invalid_argument("equal interior cores need d >= 4, got " + std::to_string(d));
  std::vector<SeparationReport> reports;
  if (samples_per_cell == 0) return reports;
  std::uint64_t cell = 0;
  for (std::size_t n : n_values) {
    for (std::size_t r : r_values) {
      require_positive(n, r);
      SeparationReport report = make_separation_report(d, n, r, rel_tol);
      const std::uint64_t cell_seed = derive_seed(seed, cell++);
      for (std::size_t s = 0; s < samples_per_cell; ++s) {
        const std::uint64_t sample_seed = derive_seed(cell_seed, s);
        report.samples.push_back(odd_even_outcome(tt_equal_cores_random(d, n, r, sample_seed), s,
                                                  sample_seed, report.threshold, rel_tol));
      }
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

BoundReport verify_ht_tt_bounds(std::size_t d, std::size_t n, std::size_t r, std::size_t num_samples,
                                std::uint64_t seed, BoundDirection direction, double rel_tol) {
  if (d < 2 || !is_power_of_two(d)) {
    throw std::invalid_argument("d must be a power of two >= 2, got " + std::to_string(d));
  }
  require_positive(n, r);
  BoundReport report;
  report.direction = direction;
  report.d = d;
  report.n = n;
  report.r = r;
  report.rel_tol = rel_tol;
  report.bound = direction == BoundDirection::tt_to_ht ? r * r : ipow(r, ceil_half_log2(d));

  const Shape shape(std::vector<std::size_t>(d, n));
  for (std::size_t s = 0; s < num_samples; ++s) {
    const std::uint64_t sample_seed = derive_seed(seed, s);
    RankVector observed;
    if (direction == BoundDirection::tt_to_ht) {
      const DenseTensor x = tt_to_dense(tt_random(shape, RankVector(d - 1, r), sample_seed));
      observed = ranks_from_dense(x, RankKind::ht, rel_tol);
    } else {
      const DenseTensor x = ht_to_dense(ht_random(shape, ht_uniform_ranks(d, r), sample_seed));
      observed = ranks_from_dense(x, RankKind::tt, rel_tol);
    }
    SampleOutcome out;
    out.sample = s;
    out.seed = sample_seed;
    out.observed_rank = *std::max_element(observed.begin(), observed.end());
    out.pass = out.observed_rank <= report.bound;
    report.samples.push_back(out);
  }
  return report;
}

void write_csv(std::ostream& out, const SeparationReport& report, bool header) {
  if (header) out << "sample,seed,d,n,r,q,threshold,observed_rank,pass\n";
  for (const auto& s : report.samples) {
    out << s.sample << ',' << s.seed << ',' << report.d << ',' << report.n << ',' << report.r << ','
        << report.q << ',' << report.threshold << ',' << s.observed_rank << ',' << (s.pass ? 1 : 0)
        << '\n';
  }
}

void write_csv(std::ostream& out, std::span<const SeparationReport> reports) {
  out << "sample,seed,d,n,r,q,threshold,observed_rank,pass\n";
  for (const auto& r : reports) write_csv(out, r, false);
}

void write_csv(std::ostream& out, const BoundReport& report) {
  out << "sample,seed,direction,d,n,r,bound,observed_rank,pass\n";
  for (const auto& s : report.samples) {
    out << s.sample << ',' << s.seed << ',' << to_string(report.direction) << ',' << report.d << ','
        << report.n << ',' << report.r << ',' << report.bound << ',' << s.observed_rank << ','
        << (s.pass ? 1 : 0) << '\n';
  }
}

}  // namespace ttnet
