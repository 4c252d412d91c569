#pragma once

#include <cstdint>

namespace tjm {

/// Deterministic per-trajectory random stream: xoshiro256++ seeded from
/// (base_seed, trajectory_index) through SplitMix64, so every trajectory
/// owns an independent, replayable sequence regardless of scheduling.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0) {}

  RandomStream(std::uint64_t base_seed, std::uint64_t stream_index) {
    std::uint64_t x = splitmix(base_seed + 0x9E3779B97F4A7C15ull * (stream_index + 1));
    for (auto& s : state_) {
      x = splitmix(x);
      s = x;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 bits of entropy.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace tjm
