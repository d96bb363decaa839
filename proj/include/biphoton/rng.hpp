#pragma once

#include <cstdint>

namespace biphoton {

/// SplitMix64 generator (Steele, Lea & Flood). Satisfies UniformRandomBitGenerator.
///
/// Monte Carlo code never shares one generator between events: every event (and every
/// accidental-background channel) owns a stream derived from (seed, domain, index) by
/// `stream_for`, so results do not depend on how work is split across threads.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_nonzero() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// The SplitMix64 output finaliser, used as a 64-bit hash.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class StreamDomain : std::uint64_t {
  events = 1,
  accidentals = 2,
  settings = 3,
};

/// Generator for item `index` of `domain` under `seed`.
inline SplitMix64 stream_for(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  const std::uint64_t base = mix64(seed) ^ mix64(static_cast<std::uint64_t>(domain) << 56);
  return SplitMix64(mix64(base ^ mix64(index)));
}

}  // namespace biphoton
