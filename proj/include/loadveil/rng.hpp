#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace loadveil {

// Counter-based splittable PRNG.  A stream is identified by a 64-bit key;
// child streams are derived by hashing (key, ids...) so that every
// (experiment, profile, grid-index) combination owns an independent stream
// regardless of evaluation order or thread scheduling.  Output is generated
// with the splitmix64 sequence, which is adequate for the statistical
// experiments run here and is bit-stable across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

  // Deterministic child stream; never advances this stream.
  RngStream derive(std::initializer_list<std::uint64_t> ids) const {
    std::uint64_t k = key_;
    for (std::uint64_t id : ids) k = mix(k ^ mix(id + 0x9e3779b97f4a7c15ULL));
    return RngStream(k);
  }
  RngStream derive(std::uint64_t a) const { return derive({a}); }
  RngStream derive(std::uint64_t a, std::uint64_t b) const { return derive({a, b}); }
  RngStream derive(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return derive({a, b, c});
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
    return mix(z);
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny relative to 2^64.
    return next_u64() % n;
  }

  // Standard normal via Box-Muller (no cached spare, keeps the stream
  // position a pure function of the draw count).
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace loadveil
