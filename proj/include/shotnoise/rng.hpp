#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace shotnoise {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Two streams with the same key produce bit-identical sequences; streams
/// with different ids are seeded through a seed_seq mix and are treated as
/// independent. Satisfies UniformRandomBitGenerator so it can drive the
/// standard distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream for sub-task k; deterministic in (seed, stream_id, k).
  RngStream derive(std::uint64_t k) const;

  // Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  double exponential();  // mean 1
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace shotnoise
