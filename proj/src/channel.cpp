#include "mscap/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mscap {

FadingDistribution::FadingDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) {
        throw std::invalid_argument("fading law needs at least one atom");
    }
    double total = 0.0;
    for (const Atom& a : atoms_) {
        if (!std::isfinite(a.gain)) {
            throw std::invalid_argument("fading gain must be finite");
        }
        if (!(a.probability >= 0.0) || !std::isfinite(a.probability)) {
            throw std::invalid_argument("fading probability must be >= 0");
        }
        total += a.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("fading probabilities must sum to 1, got " + std::to_string(total));
    }
}

FadingDistribution FadingDistribution::point_mass(double gain) {
    return FadingDistribution({{gain, 1.0}});
}

FadingDistribution FadingDistribution::bernoulli(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("bernoulli failure probability must be in [0,1]");
    }
    return FadingDistribution({{0.0, epsilon}, {1.0, 1.0 - epsilon}});
}

double FadingDistribution::erasure_probability() const {
    double p = 0.0;
    for (const Atom& a : atoms_) {
        if (a.gain == 0.0) p += a.probability;
    }
    return p;
}

ChannelParams::ChannelParams(double power_budget, double noise_variance, FadingDistribution fading_law)
    : power(power_budget), noise_var(noise_variance), fading(std::move(fading_law)) {
    if (!(power >= 0.0) || !std::isfinite(power)) {
        throw std::invalid_argument("power budget must be finite and >= 0");
    }
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
        throw std::invalid_argument("noise variance must be finite and >= 0");
    }
    if (noise_var == 0.0 && fading.erasure_probability() == 1.0) {
        throw std::invalid_argument("channel with zero noise and all-zero fade carries nothing");
    }
}

double sample_fade(const FadingDistribution& dist, RngStream& rng) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    for (const auto& atom : dist.atoms()) {
        cum += atom.probability;
        if (u < cum) return atom.gain;
    }
    return dist.atoms().back().gain;  // u landed in the rounding slack at 1
}

ChannelUse transmit(const ChannelParams& params, double input, RngStream& rng) {
    const double g = sample_fade(params.fading, rng);
    const double n = rng.next_gaussian(std::sqrt(params.noise_var));
    return {g * input + n, g};
}

double instantaneous_capacity_nats(const ChannelParams& params, double gain) {
    if (params.noise_var == 0.0) {
        throw std::domain_error("infinite capacity");
    }
    return 0.5 * std::log1p(gain * gain * params.power / params.noise_var);
}

}  // namespace mscap
