#pragma once

#include <cstdint>
#include <random>

namespace frb {

// Seeding discipline: every parallel work item derives its own generator from
// (master seed, stream ids) through splitmix64.  Results are then independent
// of scheduling and thread count.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(master ^ 0x243f6a8885a308d3ULL);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(derive_seed(master, a, b, c));
}

}  // namespace frb
