#pragma once

#include <bit>
#include <cstdint>
#include <random>

namespace vantrust {

// splitmix64 finalizer; used to derive per-cell seeds.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t seed_combine(uint64_t seed, uint64_t value) {
  return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t seed_combine(uint64_t seed, double value) {
  return seed_combine(seed, std::bit_cast<uint64_t>(value));
}

/// Deterministic uniform stream. mt19937_64 output is pinned by the C++
/// standard; the value mappings below avoid the implementation-defined
/// std::uniform_* distributions so streams are byte-stable across platforms.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  uint64_t uniform_index(uint64_t n) { return n != 0 ? gen_() % n : 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace vantrust
