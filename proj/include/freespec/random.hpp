#pragma once

#include "freespec/common.hpp"

#include <cstdint>
#include <limits>
#include <random>

namespace freespec {

/// SplitMix64 finalizer; a good 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash an ordered tuple of 64-bit keys into one seed.
inline std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

/// SplitMix64 generator. Cheap to construct, which makes it suitable for
/// counter-based streams keyed by (seed, entry coordinates).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

using Rng = std::mt19937_64;

/// Hermitian matrix (G + G*)/2 with G having independent standard complex Gaussian entries.
Matrix random_hermitian(int size, Rng& rng);

/// Matrix with independent standard complex Gaussian entries.
Matrix random_complex(int rows, int cols, Rng& rng);

}  // namespace freespec
