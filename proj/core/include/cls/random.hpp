#pragma once

#include <cstdint>
#include <random>

namespace cls {

// splitmix64; used to derive independent substreams from one master seed so
// that parallel replicates and per-pair draws do not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for substream `index` of stream `seed`. Stable across runs and thread
// counts by construction.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Uniform double in [0, 1) from one 64-bit word.
inline double uniform01(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  std::uint64_t s = seed;
  std::uint64_t warm = splitmix64(s);
  return std::mt19937_64(warm);
}

}  // namespace cls
