#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace seagrass {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed for a named sub-stream of a run seed, so every
/// module draws from its own generator while the whole run stays reproducible.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(base ^ mix64(h));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace seagrass
