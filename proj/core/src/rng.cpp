#include "kernelflow/rng.hpp"

#include <cmath>

namespace kernelflow {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : state_(mix64(seed + kGoldenGamma)) {}

RandomStream RandomStream::split(std::uint64_t stream_id) const {
  return RandomStream(state_ ^ mix64(stream_id + 0x632BE59BD9B4E019ULL));
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(state_ + counter_ * kGoldenGamma);
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_normal() {
  double u1 = next_uniform();
  double u2 = next_uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace kernelflow
