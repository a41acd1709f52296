#pragma once

#include <cstdint>

namespace kernelflow {

/// Counter-based random stream built on the SplitMix64 finalizer: draw k of a
/// stream with state s is mix64(s + k * golden_gamma). Seeding is a pure
/// function of (seed, stream id), so streams are splittable and two runs with
/// the same seed produce identical draws regardless of draw interleaving
/// across streams.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Derive an independent stream; child draws never collide with the parent.
  RandomStream split(std::uint64_t stream_id) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit mantissa.
  double next_uniform();

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double next_normal();

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

}  // namespace kernelflow
