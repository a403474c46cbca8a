#pragma once

#include <cstdint>

namespace algd {

/// Deterministic random stream keyed by (seed, stream_id).
///
/// The generator is fully specified so that an independent
/// reimplementation reproduces the exact draw sequence:
///
///   mix(z):  z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
///            z *= 0x94D049BB133111EB; z ^= z >> 31   (splitmix64 finalizer)
///   state0 = mix(seed) + mix(0x9E3779B97F4A7C15 ^ stream_id)
///   next_u64: state += 0x9E3779B97F4A7C15; return mix(state)
///
///   uniform01  = (next_u64 >> 11) * 2^-53                   in [0, 1)
///   normal     = Box-Muller from exactly two u64 draws:
///                u1 = ((next_u64 >> 11) + 1) * 2^-53        in (0, 1]
///                u2 = (next_u64 >> 11) * 2^-53
///                z  = sqrt(-2 ln u1) * cos(2 pi u2)
///   index(n)   = next_u64() % n   (modulo; bias < n / 2^64)
///
/// No state is cached between calls, so the mapping from draws to u64
/// outputs is fixed. Two streams with equal (seed, stream_id) produce
/// identical sequences on any platform (floating-point draws may differ
/// in the last ulp across libm implementations).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform01();

  /// Uniform in [lo, hi): lo + (hi - lo) * uniform01().
  double uniform_in(double lo, double hi);

  /// Standard normal draw; consumes exactly two u64 draws.
  double normal();

  /// Uniform index in {0, ..., n-1}; n must be positive.
  std::uint64_t index(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

}  // namespace algd
