#pragma once

#include "hardball/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace hardball {

// The single source of randomness.  Every experiment derives all of its
// draws from one seed through this generator; the mappings below avoid
// std::uniform_real_distribution and friends, whose output is
// implementation-defined, so equal seeds give equal streams everywhere.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1), 53 random bits
  Real uniform() {
    return static_cast<Real>(engine_() >> 11) * 0x1.0p-53;
  }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller
  Real gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Real u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const Real u2 = uniform();
    const Real radius = std::sqrt(-2 * std::log(u1));
    const Real angle = 2 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec gaussian_vec(Index n) {
    Vec v(n);
    for (Index k = 0; k < n; ++k) v[k] = gaussian();
    return v;
  }

  // a sub-stream for the k-th independent task of an experiment
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t k) {
    // splitmix64 step over seed ^ golden-ratio multiples of k
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  Real spare_ = 0;
};

}  // namespace hardball
