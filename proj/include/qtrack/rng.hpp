#pragma once

#include <cstdint>
#include <random>

namespace qtrack {

// All randomness in the project flows through std::mt19937_64, whose output
// sequence is fixed by the C++ standard, so seeded runs are bit-reproducible
// across platforms. std::uniform_real_distribution is *not* pinned by the
// standard, hence the hand-rolled mappings below.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 bits of mantissa.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
// n is always tiny relative to 2^64 so the bias is far below reproducibility
// concerns (the sequence itself is what must be stable).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return rng() % n;
}

// Fisher-Yates shuffle using uniform_index (std::shuffle's draw pattern is
// implementation-defined).
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace qtrack
