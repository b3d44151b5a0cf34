#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace deplearn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  return splitmix64(seed ^ fnv1a(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::string_view item,
                                 std::uint64_t n = 0) noexcept {
  return splitmix64(splitmix64(derive_seed(seed, tag) ^ fnv1a(item)) + n);
}

}  // namespace deplearn
