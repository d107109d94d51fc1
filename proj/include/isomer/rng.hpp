// Counter-based RNG: each draw is a pure function of (seed, counters), so
// sampling stays deterministic under any parallel schedule.
#pragma once

#include <cstdint>

namespace isomer {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Uniform in [0, 1).
inline double hash_uniform(uint64_t seed, uint64_t a, uint64_t b = 0) {
  uint64_t h = hash_combine(hash_combine(splitmix64(seed), a), b);
  return double(h >> 11) * 0x1.0p-53;
}

}  // namespace isomer
