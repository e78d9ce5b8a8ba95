#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace catmix {

/// Seeded generator whose draws depend only on the 64-bit engine output, so
/// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  double normal();
  double exponential() { return -std::log(uniform_open0()); }
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  double beta(double a, double b);
  /// Fills `out` with a Dirichlet(alpha, ..., alpha) draw.
  void dirichlet(double alpha, std::span<double> out);
  /// Index drawn from the probability vector `probs` (sums to 1).
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace catmix
