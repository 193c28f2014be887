#pragma once

#include <cstdint>
#include <random>

namespace ptlab::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Combine seed words into one well-mixed 64-bit seed. Used to derive
/// per-sample seeds from (master seed, cell index, sample index, class tag)
/// so that parallel sweeps are reproducible independently of scheduling.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x9E3779B97F4A7C15ull));
}

template <class... Rest>
std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix(mix(a, b), static_cast<std::uint64_t>(rest)...);
}

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace ptlab::rng
