#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace textrl {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Child seed for the stream (seed, label, index). Every random stream in a
// run is reached from one master seed through chains of derive_seed calls,
// which is what makes whole runs replayable from a single --seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a64(label)) + index);
}

inline Rng make_rng(std::uint64_t seed, std::string_view label,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(seed, label, index));
}

// Unbiased draw in [0, n). Rejection sampling keeps the stream portable
// across standard libraries, unlike std::uniform_int_distribution.
inline std::uint64_t bounded_uint(Rng& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void fisher_yates_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded_uint(rng, i)]);
  }
}

}  // namespace textrl
