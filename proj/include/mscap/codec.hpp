#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mscap/channel.hpp"

namespace mscap {

/// Decoder-side view of one scalar estimation chain. `cond_error_var` is the
/// variance of (estimate - x0) conditioned on the realized fade history; the
/// encoder can track the same value through the perfect feedback link, so
/// both ends normalize by it consistently.
struct ScalarCodecState {
    double estimate = 0.0;
    double cond_error_var = 0.0;
    std::size_t step = 0;
    double prior_var = 0.0;
};

/// Fresh chain for a source with the given prior variance.
ScalarCodecState make_scalar_codec(double prior_var);

/// Channel input for the current step. Step 0 scales the source by
/// sqrt(P/prior_var); later steps scale the current estimation error by
/// sqrt(P/cond_error_var), so the conditional second moment is exactly P.
/// Once the tracked variance has collapsed to (near) zero there is nothing
/// left to send and the output is 0.
double encode(const ScalarCodecState& state, double x0, double power);

/// Consumes one channel output and the disclosed fade. Step 0 is the raw
/// rescaling estimate; afterwards the correlation-ratio update
///   estimate -= g*sqrt(P*v)/(noise_var + g^2 P) * r,
///   v *= noise_var/(noise_var + g^2 P).
/// An erased use (g = 0) changes nothing but the step count.
/// Throws std::overflow_error("channel output overflow") on non-finite r.
ScalarCodecState decode_update(const ScalarCodecState& state, double r, double g, double power,
                               double noise_var);

/// Periodic TDMA slot assignment: coordinate slot_owner[k] transmits in the
/// k-th use of every period.
struct Schedule {
    std::size_t period = 1;            // tau
    std::vector<int> slot_owner;       // length tau
    std::vector<double> target_share;  // alphas, sum 1

    std::size_t slots_of(int coordinate) const;
};

/// Largest-remainder apportionment of tau slots to the target shares
/// (deterministic tie-break by lower coordinate index), followed by a
/// transfer pass guaranteeing each positive-share coordinate at least one
/// slot. Slots are spread evenly through the period.
/// Throws std::invalid_argument("period too short") when tau is smaller than
/// the number of strictly positive shares.
Schedule make_schedule(const std::vector<double>& alphas, std::size_t tau);

struct VectorCodecState {
    std::vector<ScalarCodecState> coords;
    Schedule schedule;
    std::size_t cursor = 0;
};

VectorCodecState make_vector_codec(const std::vector<double>& prior_vars, Schedule schedule);

/// What one TDMA use did, for harness bookkeeping.
struct RoundRecord {
    int owner = 0;
    double input = 0.0;   // s
    double output = 0.0;  // r
    double gain = 0.0;    // g
};

/// One channel use: the slot owner encodes its coordinate of x0, the use goes
/// through `transmit`, only that coordinate's chain is updated, the cursor
/// advances mod tau.
VectorCodecState vector_round(const VectorCodecState& state, std::span<const double> x0,
                              const ChannelParams& channel, RngStream& rng,
                              RoundRecord* record = nullptr);

}  // namespace mscap
