#pragma once

#include <array>
#include <cstdint>

namespace mscap {

/// Seeded, splittable random stream (xoshiro256++ core, SplitMix64 seeding).
///
/// The pair (master_seed, stream_index) fully determines the sample sequence,
/// bit-for-bit, independent of platform threads or call sites. Distinct stream
/// indices give statistically independent streams, which is what lets Monte
/// Carlo trials run in parallel while staying reproducible.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_uniform();

    /// Zero-mean Gaussian with the given standard deviation (Box-Muller,
    /// one variate per call; consumes exactly two uniforms).
    double next_gaussian(double stddev);

  private:
    std::array<std::uint64_t, 4> state_;
};

}  // namespace mscap
