#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace msmpolicy {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` of `master`: splitmix64(master ^ splitmix64(index)).
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index));
}

/// Deterministic random stream.
///
/// Engine is std::mt19937_64 (its output sequence is fixed by the standard).
/// Uniforms take the top 53 bits; normals use Box-Muller without caching and
/// bounded integers use a 128-bit multiply, so every draw is specified here
/// and does not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const unsigned __int128 product = static_cast<unsigned __int128>(engine_()) * bound;
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace msmpolicy
