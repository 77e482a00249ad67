#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace sfroute {

// Seeded random stream. Same seed, same sequence of draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Independent child stream keyed by `salt` (splitmix64 finalizer on seed ^ salt).
  RngStream derive(std::uint64_t salt) const {
    std::uint64_t z = seed_ ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RngStream(z ^ (z >> 31));
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  bool bernoulli(double p) { return p > 0.0 && uniform01() < p; }

  // floor(x) plus one more with probability frac(x); x >= 0.
  std::uint64_t stochastic_round(double x) {
    const double whole = std::floor(x);
    return static_cast<std::uint64_t>(whole) + (bernoulli(x - whole) ? 1 : 0);
  }

  template <class It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sfroute
