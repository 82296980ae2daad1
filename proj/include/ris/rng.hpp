#pragma once

#include <cstdint>
#include <random>

namespace ris {

// mt19937_64's output sequence is fully specified by the standard; the
// mappings below avoid std::uniform_*_distribution, whose draw order differs
// between standard-library implementations, so seeded runs reproduce
// everywhere.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// SplitMix64 mix — derives independent, well-separated stream seeds from one
// master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1), 53 random bits.
inline double uniform01(Rng& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n) via 128-bit multiply-shift.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace ris
