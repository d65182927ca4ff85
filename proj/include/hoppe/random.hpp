#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace hoppe {

using Rng = std::mt19937_64;

/// Seed used when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20120905ULL;

/// splitmix64 finalizer; used only to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) {
  return mix64(mix64(master) ^ mix64(a + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

/// Independent stream for replicate `index` of an experiment seeded with `master`.
inline Rng stream(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index in [0, n); multiply-shift, bias below 2^-40 for the pool sizes used here.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  __extension__ using wide = unsigned __int128;
  return static_cast<std::size_t>((static_cast<wide>(rng()) * n) >> 64);
}

}  // namespace hoppe
