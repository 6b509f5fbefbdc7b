#pragma once

#include <cstdint>
#include <random>

namespace sddmon {

/// Root seed of a reproducible computation.
struct RngSeed {
  std::uint64_t value = 0;
  bool operator==(const RngSeed&) const = default;
};

using Engine = std::mt19937_64;

/// splitmix64 finaliser; spreads nearby seeds over the whole state space.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed for replicate `index` of sub-stream `stream`.
constexpr RngSeed derive(RngSeed seed, std::uint64_t stream, std::uint64_t index = 0) noexcept {
  return RngSeed{mix64(mix64(seed.value ^ mix64(stream)) ^ index)};
}

inline Engine make_engine(RngSeed seed) { return Engine(seed.value); }

namespace stream {
// Sub-stream tags keep independent consumers of one root seed apart.
inline constexpr std::uint64_t kBootstrap = 1;
inline constexpr std::uint64_t kAdCritical = 2;
inline constexpr std::uint64_t kPowerTrial = 3;
inline constexpr std::uint64_t kBuildSet = 4;
}  // namespace stream

inline std::size_t uniform_index(Engine& eng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
}

}  // namespace sddmon
