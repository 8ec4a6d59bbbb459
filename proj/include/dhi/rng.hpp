#pragma once

// Seeded random streams. Every consumer derives an independent substream
// from (base seed, index) so that results depend only on seeds and never on
// the number of worker threads.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dhi {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `index` under `base`.
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  for (std::uint64_t index : path) base = derive_seed(base, index);
  return base;
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
/// Spelled out so streams are identical across standard libraries.
inline std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  std::uint64_t x = engine();
  auto m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace dhi
