#pragma once

#include <cmath>
#include <cstdint>

namespace racer {

/// splitmix64 step; good enough mixing for simulation noise and sampling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic PRNG with explicit distributions.
///
/// The standard <random> distributions are implementation-defined, which
/// would silently change recorded runs between standard libraries. Every
/// draw here is pinned down bit-for-bit by this header alone, so a seeded
/// run reproduces byte-identically anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : origin_(seed), state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound); bound must be nonzero.
  std::uint32_t uniformInt(std::uint32_t bound) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// Standard normal via Box-Muller (no caching, so draw order is obvious).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Independent stream derived from the construction seed (not from the
  /// current state), so split(k) is stable no matter how much was drawn.
  Rng split(std::uint64_t stream) const {
    std::uint64_t s = origin_ ^ (0x9e3779b97f4a7c15ULL * (stream + 0x632be59bd9b4e019ULL));
    (void)splitmix64(s);
    return Rng(s);
  }

  Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }

 private:
  std::uint64_t origin_;
  std::uint64_t state_;
};

}  // namespace racer
