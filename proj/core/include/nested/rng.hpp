#pragma once

#include <cstdint>

namespace nested {

/// Deterministic random stream keyed by (seed, stream_id).
///
/// The generator is xoshiro256** with state derived from the key by a
/// splitmix64 chain, and all variate transforms (uniform, normal, gamma,
/// beta) are implemented here rather than through <random> distributions,
/// whose output is implementation-defined. Identical keys therefore give
/// bit-identical draw sequences on every platform, independent of how
/// many workers interleave their calls. The engine derives one stream
/// per initial point, per candidate slot and per simulation draw.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns an endpoint.
  double uniform_open();
  double uniform(double a, double b);
  /// Unbiased integer in [0, n); n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal by inversion (portable, no rejection state).
  double normal();
  /// Gamma(shape, 1), shape > 0 (Marsaglia-Tsang, with the shape < 1 boost).
  double gamma(double shape);
  /// Beta(a, b), a > 0, b > 0.
  double beta(double a, double b);

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace nested
