#pragma once

// Portable random streams. Nothing here depends on the standard library's
// distribution implementations, so a (seed, stream) pair yields the same
// sequence on every platform with IEEE-754 doubles and a conforming libm.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace obf::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of 64-bit keys into one seed.
inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return mix(mix(a, b), c); }

// xoshiro256** 1.0 (Blackman & Vigna), state filled by splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Xoshiro256& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Uniform on (0, 1].
inline double uniform_open0(Xoshiro256& g) { return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53; }

// Largest accepted draw so that the accepted range is a multiple of bound.
inline constexpr std::uint64_t max_multiple(std::uint64_t bound) {
  return ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
}

// Uniform integer in [0, bound) by rejection (no modulo bias).
inline std::uint64_t uniform_below(Xoshiro256& g, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = max_multiple(bound);
  for (;;) {
    const std::uint64_t x = g();
    if (x <= limit) return x % bound;
  }
}

// Standard normals by Box-Muller. Each pair yields the cosine branch first,
// then the sine branch.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0(gen_);
    const double u2 = uniform01(gen_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform() { return uniform01(gen_); }
  Xoshiro256& engine() { return gen_; }

 private:
  Xoshiro256 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace obf::rng
