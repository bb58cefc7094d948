#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cutofflab {

/// Engine used throughout the library.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent substream seed from a master seed and a path of
/// indices, e.g. (seed, season, event) or (seed, replicate). The result only
/// depends on the arguments, so work split across threads draws the same
/// numbers regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Engine seeded from derive_seed(master, path).
Engine substream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw (Box-Muller, no cached second value).
double standard_normal(Engine& eng);

}  // namespace cutofflab
