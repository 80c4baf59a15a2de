#pragma once

#include <cstdint>

namespace vb {

// SplitMix64. Chosen over std::mt19937 + distributions because the standard
// distributions are implementation-defined; this generator produces the same
// stream on every platform. Substreams are derived by hashing (seed, index)
// so parallel samplers are schedule-independent.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be > 0. Modulo reduction: the tiny bias is
  // irrelevant at toy scale and the result is platform-stable.
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Uniform double in [0, 1) built from 53 bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  static uint64_t mix(uint64_t seed, uint64_t index) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return r.next_u64();
  }

  static Rng substream(uint64_t seed, uint64_t index) { return Rng(mix(seed, index)); }

 private:
  uint64_t state_;
};

}  // namespace vb
