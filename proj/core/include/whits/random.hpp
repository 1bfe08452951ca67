/**
 * @file random.hpp
 * @brief Seeded random streams with platform-independent draws.
 */
#pragma once

#include <cstdint>
#include <random>

namespace whits {

/**
 * @brief mt19937_64 stream keyed by (seed, stream id).
 *
 * The std distributions are implementation-defined, so all draws here are
 * built directly on the engine's output to keep catalogs bit-identical
 * across standard libraries.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform double on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer on [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace whits
