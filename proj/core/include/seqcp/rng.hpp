#pragma once

#include <array>
#include <cstdint>

namespace seqcp {

// xoshiro256** seeded through splitmix64. The variate transforms below are
// fixed so that a (scenario, seed) pair names the same dataset everywhere;
// see docs/formats.md for the exact recipes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform on (0, 1].
  double uniform_open0() noexcept;
  // Box-Muller, cosine branch: one standard normal per two uniforms.
  double normal() noexcept;
  bool bernoulli(double p) noexcept;
  // Knuth multiplication for mean < 10, Hormann's PTRS otherwise.
  std::uint64_t poisson(double mean) noexcept;
  // Uniform integer in [0, n) by rejection on the top bits.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace seqcp
