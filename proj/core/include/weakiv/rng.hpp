#pragma once

#include <cstdint>

namespace weakiv {

// Counter-based random stream: xoshiro256++ seeded via SplitMix64 from a
// (seed, stream) pair. Streams with distinct ids are independent for all
// practical purposes, so replication r of a simulation can draw from
// RngStream(seed, r) regardless of execution order or worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on (0, 1] (never 0, safe under log()).
  double uniform();

  // Standard normal via Box-Muller; the paired value is cached.
  double normal();

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace weakiv
