#include "shotnoise/rng.hpp"

#include <cmath>

namespace shotnoise {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x5ec0ffeeu};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RngStream RngStream::derive(std::uint64_t k) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(k + 0x632BE59BD9B4E019ULL)));
}

double RngStream::uniform() {
  // (m + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t m = engine_() >> 11;
  return (static_cast<double>(m) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

std::uint64_t RngStream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(*this);
}

}  // namespace shotnoise
