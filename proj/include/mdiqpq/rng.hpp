#pragma once

#include <cstdint>

namespace mdiqpq {

// SplitMix64: one 64-bit word of state, an additive Weyl constant and a
// finalizing mixer. Small, fast, and good enough statistically for
// protocol simulation; most importantly it is trivially seedable, which
// is what the reproducibility guarantees below are built on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Unbiased (Lemire multiply-shift with
  // rejection on the low word). bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound) {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t cutoff = -bound % bound;
      while (lo < cutoff) {
        m = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

// Finalizing mixer used to key derived streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream for a single protocol round, keyed by (seed, round).
// Rounds may be evaluated in any order and still see identical draws.
inline SplitMix64 round_stream(std::uint64_t seed, std::uint64_t round) {
  return SplitMix64(mix64(seed + 0x632BE59BD9B4E019ULL) ^ mix64(round ^ 0xD1B54A32D192ED03ULL));
}

// Stream for auxiliary draws (test-subset selection, position picks, session
// seeds), keyed by (seed, tag) so independent consumers never share a stream.
inline SplitMix64 derived_stream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(mix64(seed ^ 0x9E6C63D0876A9A35ULL) + mix64(tag) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace mdiqpq
