#pragma once

#include <cstdint>
#include <string_view>

namespace riskplan {

// splitmix64: tiny deterministic generator, identical output on every
// platform. All seeded behavior in the toolkit goes through this so traces
// reproduce byte-for-byte.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }
};

// 64-bit FNV-1a, used to derive episode seeds from (base, cell, index).
inline std::uint64_t hash_combine(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ base;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(base);
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  mix(index);
  // finalize through splitmix so nearby inputs decorrelate
  return Rng(h).next_u64();
}

}  // namespace riskplan
