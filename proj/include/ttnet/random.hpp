#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace ttnet {

// Portable random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard. The standard distributions are
// implementation-defined, so the transforms below are written out:
//   uniform()  = (x >> 11) * 2^-53, in [0, 1)
//   normal()   = Box-Muller on (1 - u1, u2), second variate cached
//   index(n)   = rejection sampling on the top bits
// Identical seeds therefore give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  void fill_normal(std::span<double> out, double sd = 1.0);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer applied to (seed, stream): independent per-sample seeds
/// that do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ttnet
