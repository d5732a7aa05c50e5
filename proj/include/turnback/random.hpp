#pragma once

// Deterministic, platform-stable random streams.
//
// derive_rng(seed, id) mixes the seed and a 64-bit FNV-1a hash of the id with
// SplitMix64 and seeds a std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Bounded draws use rejection sampling instead of
// std::uniform_int_distribution, whose algorithm differs between standard
// libraries. Results are therefore identical on every conforming platform.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace turnback {

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t state) : engine_(state) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % bound + 1) % bound;
    std::uint64_t x = next();
    while (x > limit) x = next();
    return static_cast<std::size_t>(x % bound);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline RandomStream derive_rng(std::uint64_t seed, std::string_view dialogue_id) {
  return RandomStream(splitmix64(splitmix64(seed) ^ fnv1a64(dialogue_id)));
}

}  // namespace turnback
