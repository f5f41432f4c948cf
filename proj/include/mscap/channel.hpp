#pragma once

#include <utility>
#include <vector>

#include "mscap/rng.hpp"

namespace mscap {

/// Finite discrete law of the i.i.d. channel fade g. Discrete-only by design:
/// every expectation downstream is then an exact finite sum.
class FadingDistribution {
  public:
    struct Atom {
        double gain;
        double probability;
    };

    /// Throws std::invalid_argument unless probabilities are nonnegative,
    /// sum to 1 within 1e-12, and gains are finite.
    explicit FadingDistribution(std::vector<Atom> atoms);

    static FadingDistribution point_mass(double gain);

    /// Bernoulli fade: gain 0 with probability epsilon (failure), else 1.
    static FadingDistribution bernoulli(double epsilon);

    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Total probability of atoms with gain exactly 0.
    double erasure_probability() const;

  private:
    std::vector<Atom> atoms_;
};

/// Power-constrained fading channel r = g*s + n with E{s^2} <= power and
/// n ~ Gaussian(0, noise_var). The fade realization is disclosed to the
/// receiver after each use.
struct ChannelParams {
    double power;
    double noise_var;
    FadingDistribution fading;

    ChannelParams(double power_budget, double noise_variance, FadingDistribution fading_law);
};

struct ChannelUse {
    double output;  // r = g*s + n
    double gain;    // realized fade, known at the decoder
};

/// Draws one fade realization; consumes exactly one uniform from the stream.
double sample_fade(const FadingDistribution& dist, RngStream& rng);

/// One channel use. The fade is drawn first, then the noise, so the (g, n)
/// sequence of a stream is a fixed function of (seed, index).
ChannelUse transmit(const ChannelParams& params, double input, RngStream& rng);

/// Instantaneous Shannon capacity 0.5*ln(1 + g^2 P / noise_var), in nats.
/// Throws std::domain_error("infinite capacity") if noise_var == 0.
/// Note the unit boundary: this is the only nats-valued quantity in the
/// library; everything in capacity.hpp is in bits.
double instantaneous_capacity_nats(const ChannelParams& params, double gain);

}  // namespace mscap
