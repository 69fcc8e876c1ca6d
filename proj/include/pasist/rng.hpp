#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pasist {

using Rng = std::mt19937_64;

// Derives an independent generator from a root seed, a stream name and an
// index. The mapping is stable across runs and platforms.
Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0);

std::uint64_t fnv1a64(std::string_view text);

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace pasist
