#include "mscap/rng.hpp"

#include <cmath>

namespace mscap {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// SplitMix64 step; used only to expand the (seed, index) pair into state.
inline std::uint64_t splitmix_next(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
    // Decorrelate the two seed words before expansion so that nearby
    // (seed, index) pairs land far apart in state space.
    std::uint64_t s = master_seed ^ 0x8A5CD789635D2DFFULL;
    std::uint64_t mixed = splitmix_next(s);
    s = mixed + stream_index * 0x9E3779B97F4A7C15ULL;
    for (auto& word : state_) {
        word = splitmix_next(s);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1;  // xoshiro state must be nonzero
    }
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian(double stddev) {
    // u1 in (0,1] keeps the log finite.
    const double u1 = 1.0 - next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return stddev * radius * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace mscap
