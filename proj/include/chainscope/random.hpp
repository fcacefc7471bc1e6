#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chainscope {

/// Generator used for every stochastic stage. std::mt19937_64 output is fixed
/// by the standard; the helpers below avoid the implementation-defined
/// standard distributions so results are identical across toolchains.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngName = "mt19937_64+splitmix64";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-stage seed: splitmix64(root ^ fnv1a(stage)).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : stage) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return splitmix64(root ^ h);
}

/// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace chainscope
