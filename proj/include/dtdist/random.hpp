#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dtdist {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for worker / trial `index` of a parent seed.
constexpr std::uint64_t split_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// FNV-1a; stable across platforms and runs.
constexpr std::uint64_t stable_hash(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named random stream `purpose` derived from a root seed.
constexpr std::uint64_t stream_seed(std::uint64_t root, std::string_view purpose) noexcept {
  return split_seed(root, stable_hash(purpose));
}

inline Rng make_rng(std::uint64_t root, std::string_view purpose) {
  return Rng(stream_seed(root, purpose));
}

/// Uniform double in [0, 1) with 53 random bits (portable, unlike uniform_real_distribution).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace dtdist
