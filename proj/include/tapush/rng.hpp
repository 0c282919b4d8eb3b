#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tapush {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30u)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27u)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31u);
}

/// Deterministically derives a child seed from a parent seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(parent);
  for (std::uint64_t v : path) {
    h = splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ull));
  }
  return h;
}

/// Explicit, seedable random stream. Every stochastic operation takes one of these
/// by reference; nothing in the library reads ambient entropy.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Independent child stream; advances this stream by one draw.
  RngStream split() { return RngStream(splitmix64(engine_())); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tapush
