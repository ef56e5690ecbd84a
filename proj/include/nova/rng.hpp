#pragma once

#include <cstdint>
#include <random>

namespace nova {

// Thin wrapper over mt19937_64. Variates are derived from raw engine output
// with our own transforms so that traces do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();
  std::size_t index(std::size_t n);       // uniform on {0..n-1}

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derive an independent stream seed from a base seed and labels.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace nova
