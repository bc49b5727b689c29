#pragma once

#include <cstdint>
#include <limits>

namespace landscape_lab {

// Work-item kinds used when deriving independent random streams. Every
// randomized operation draws from derive_seed(seed, kind, index) so results
// do not depend on how items are split across workers.
enum class StreamKind : std::uint64_t {
  kQuery = 1,
  kProbe = 2,
  kBootstrap = 3,
  kRestart = 4,
  kGridRow = 5,
  kGridTie = 6,
  kTrial = 7,
  kMemories = 8,
  kJacobianProbe = 9,
  kSmoothnessProbe = 10,
  kLevel = 11,
};

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamKind kind,
                                           std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64_mix(seed);
  h = splitmix64_mix(h ^ static_cast<std::uint64_t>(kind));
  return splitmix64_mix(h ^ index);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamKind kind,
                                           std::uint64_t i,
                                           std::uint64_t j) noexcept {
  return derive_seed(derive_seed(seed, kind, i), kind, j);
}

// Small counter-based generator; cheap enough to instantiate per work item.
// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace landscape_lab
