#pragma once

#include <cstdint>

namespace gcm {

// Deterministic splittable RNG built on the SplitMix64 finalizer.
//
// Algorithm (so that other implementations can reproduce the same
// distributions): the state advances by the 64-bit golden-ratio constant
// 0x9E3779B97F4A7C15 per draw, and each output is
//
//   z  = state
//   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//   z ^= z >> 27;  z *= 0x94D049BB133111EB
//   z ^= z >> 31
//
// Substreams are derived by mixing a key into the seed with the same
// finalizer: substream(k) has seed mix64(seed ^ mix64(k + GOLDEN)).
// Uniform doubles take the top 53 bits: (u >> 11) * 2^-53, in [0, 1).
class Rng {
 public:
  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  static uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Independent stream identified by (seed, key); keys may be reused at
  // different nesting depths without collision in practice.
  Rng substream(uint64_t key) const {
    return Rng(mix64(state_ ^ mix64(key + kGolden)));
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in {0, ..., n-1}; n >= 1.
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  bool bernoulli(double prob) { return uniform() < prob; }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

}  // namespace gcm
