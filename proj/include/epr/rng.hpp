#pragma once

// Counter-based random streams for the synthetic source.
//
// Algorithm: splitmix64 (Steele, Lea & Flood 2014), pinned as
// "splitmix64-streams v1" in generator reports. Each stream is the
// splitmix64 sequence with an initial state derived from (seed, stream id),
// addressed by counter, so any event's randomness is a pure function of
// (seed, stream, counter) and generation order never matters.

#include <cmath>
#include <cstdint>

namespace epr::rng {

inline constexpr const char* kAlgorithm = "splitmix64-streams v1";

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

class Stream {
public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : base_(mix64((seed + kGamma) ^ mix64(stream_id * kGamma + 0x6A09E667F3BCC909ULL))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix64(base_ + (counter + 1) * kGamma);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  bool coin(std::uint64_t counter) const { return (bits(counter) & 1ULL) != 0; }

  // Exponential with the given rate (events per unit time).
  double exponential(std::uint64_t counter, double rate) const {
    return -std::log(1.0 - uniform(counter)) / rate;
  }

private:
  std::uint64_t base_;
};

}  // namespace epr::rng
