#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numbers>
#include <utility>

namespace buoca {

// Deterministic 64-bit generator (splitmix64 core). The <random>
// distributions are implementation-defined sequences, so every sampling
// primitive the toolkit needs is spelled out here; seeded runs reproduce
// byte-identically across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for (seed, stream) pairs: per-sample, per-tree,
  // per-fold sub-generators that do not overlap for distinct streams.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL) + stream));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Unbiased integer in [0, bound), bound >= 1. Lemire multiply-shift.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t x = next();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (lo < threshold) {
        x = next();
        m = static_cast<unsigned __int128>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired deviate is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  // In-place Fisher-Yates shuffle of any random-access sequence.
  template <typename Seq>
  void shuffle(Seq& seq) {
    for (std::size_t i = seq.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(bounded(i));
      std::swap(seq[i - 1], seq[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stable scalar sub-seed for deriving nested generators.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng::derive(seed, stream).next();
}

}  // namespace buoca
