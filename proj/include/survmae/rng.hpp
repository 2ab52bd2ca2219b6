#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace survmae {

// Counter-based generator: every draw is a pure function of (seed, index, stream),
// so per-subject draws do not depend on iteration order.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t index, std::uint64_t stream = 0) const {
    return mix(mix(mix(seed_) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index, std::uint64_t stream = 0) const {
    return (static_cast<double>(bits(index, stream) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two keyed uniforms.
  double normal(std::uint64_t index, std::uint64_t stream = 0) const {
    const double u1 = uniform(index, 2 * stream);
    const double u2 = uniform(index, 2 * stream + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential with the given mean.
  double exponential(double mean, std::uint64_t index, std::uint64_t stream = 0) const {
    return -mean * std::log(uniform(index, stream));
  }

  /// Child generator for an independent sub-experiment.
  KeyedRng derive(std::uint64_t key) const { return KeyedRng(mix(seed_ ^ mix(key + 0x632be59bd9b4e019ULL))); }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace survmae
