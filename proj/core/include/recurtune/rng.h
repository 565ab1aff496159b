#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace recurtune {

// Seedable random source with a fixed algorithmic contract.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// standard. The distributions are implemented here rather than taken from
// <random> because the standard leaves their algorithms unspecified, and
// simulation outputs must be bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();

  // Standard normal via Box-Muller. Consumes exactly two engine outputs and
  // returns one variate; nothing is cached between calls.
  double Normal();

  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
  std::size_t UniformIndex(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace recurtune
