#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qs {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named substream: (seed, label) -> independent seed. Adding a new consumer
// under a new label leaves every existing stream untouched.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ splitmix64(h));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Uniform in [0, 1) with 53 random bits; avoids the implementation-defined
// std::uniform_real_distribution so streams are identical across toolchains.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

}  // namespace qs
