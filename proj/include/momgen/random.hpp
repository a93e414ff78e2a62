#pragma once

#include <cstdint>
#include <random>

namespace momgen {

using Rng = std::mt19937_64;

/// Stage identifiers mixed into derived seeds.
enum class SeedStream : std::uint64_t {
  Synthesis = 1,
  Moments = 2,
  Recovery = 3,
  Evaluation = 4,
  Sweep = 5,
};

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based child seed: mix(mix(master ^ stream) + index).
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0) {
  return mix64(mix64(master ^ (static_cast<std::uint64_t>(stream) << 56)) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) + index);
}

}  // namespace momgen
