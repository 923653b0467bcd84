#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace alise {

/// Deterministic counter-free PRNG (splitmix64). Distributions are
/// implemented explicitly so streams are identical across compilers,
/// unlike <random> distribution objects.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  /// Independent child stream, keyed by a tag so call sites do not
  /// accidentally share or reorder streams.
  Rng fork(std::string_view tag) const {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return Rng(mix(state_ + 0x9e3779b97f4a7c15ULL) ^ h);
  }
  Rng fork(uint64_t n) const {
    return Rng(mix(state_ + 0x9e3779b97f4a7c15ULL) ^ mix(n + 0x632be59bd9b4e019ULL));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
  /// n is always tiny compared to 2^64, bias is unobservable.
  int64_t uniform_int(int64_t n) { return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n)); }

  /// Standard normal via Box-Muller (one value per draw, cached pair dropped
  /// to keep the stream position independent of call parity).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Normal truncated to +-2 sigma, rescaled by std.
  double trunc_normal(double std_dev) {
    double z = normal();
    while (z < -2.0 || z > 2.0) z = normal();
    return z * std_dev;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  uint64_t state_;
};

}  // namespace alise
