#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mscap/capacity.hpp"
#include "mscap/rng.hpp"

using namespace mscap;

namespace {

ChannelParams bern_channel(double eps, double power = 1.0, double noise = 1.0) {
    return ChannelParams(power, noise, FadingDistribution::bernoulli(eps));
}

// Small random-channel generator for the property checks.
ChannelParams random_channel(RngStream& rng) {
    const std::size_t n_atoms = 1 + static_cast<std::size_t>(rng.next_uniform() * 4.0);
    std::vector<FadingDistribution::Atom> atoms(n_atoms);
    double remaining = 1.0;
    for (std::size_t k = 0; k < n_atoms; ++k) {
        atoms[k].gain = -2.0 + 4.0 * rng.next_uniform();
        if (k + 1 == n_atoms) {
            atoms[k].probability = remaining;
        } else {
            atoms[k].probability = remaining * rng.next_uniform();
            remaining -= atoms[k].probability;
        }
    }
    const double power = 0.1 + 3.0 * rng.next_uniform();
    const double noise = 0.1 + 2.0 * rng.next_uniform();
    return ChannelParams(power, noise, FadingDistribution(std::move(atoms)));
}

}  // namespace

TEST_CASE("expected contraction: exact sums") {
    CHECK(expected_contraction(bern_channel(0.0)) == 0.5);
    CHECK(expected_contraction(bern_channel(0.5)) == 0.75);
    CHECK(expected_contraction(ChannelParams(1.0, 1.0, FadingDistribution::point_mass(1.0))) == 0.5);
    CHECK_THROWS_AS(expected_contraction(ChannelParams(1.0, 0.0, FadingDistribution::point_mass(1.0))),
                    std::domain_error);
}

TEST_CASE("expected contraction agrees with a Monte Carlo oracle") {
    const ChannelParams params = bern_channel(0.5);
    RngStream rng(404, 0);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = sample_fade(params.fading, rng);
        const double f = params.noise_var / (params.noise_var + g * g * params.power);
        sum += f;
        sum_sq += f * f;
    }
    const double mc_mean = sum / n;
    const double mc_se = std::sqrt((sum_sq / n - mc_mean * mc_mean) / n);
    CHECK(std::abs(expected_contraction(params) - mc_mean) < 3.0 * mc_se);
}

TEST_CASE("expected contraction: erasure limit at huge power") {
    for (double eps : {0.1, 0.5, 0.9}) {
        CHECK(std::abs(expected_contraction(bern_channel(eps, 1e9)) - eps) < 1e-9);
    }
}

TEST_CASE("expected contraction stays in (0,1], hitting 1 only without signal") {
    RngStream rng(505, 0);
    for (int i = 0; i < 200; ++i) {
        const ChannelParams params = random_channel(rng);
        const double rho = expected_contraction(params);
        CHECK(rho > 0.0);
        CHECK(rho <= 1.0);
    }
    CHECK(expected_contraction(ChannelParams(0.0, 1.0, FadingDistribution::bernoulli(0.3))) == 1.0);
    CHECK(expected_contraction(ChannelParams(1.0, 1.0, FadingDistribution::point_mass(0.0))) == 1.0);
}

TEST_CASE("mean square capacity values") {
    CHECK(mean_square_capacity_bits(bern_channel(0.0)) == 0.5);  // AWGN endpoint
    CHECK(mean_square_capacity_bits(bern_channel(1.0)) == 0.0);  // disconnected
    CHECK(mean_square_capacity_bits(bern_channel(0.5)) ==
          doctest::Approx(0.2075187496394219).epsilon(1e-14));
}

TEST_CASE("shannon capacity values") {
    CHECK(shannon_capacity_bits(bern_channel(0.5)) == 0.25);
    CHECK(shannon_capacity_bits(ChannelParams(1.0, 1.0, FadingDistribution::point_mass(1.0))) == 0.5);
    CHECK(shannon_capacity_bits(bern_channel(1.0)) == 0.0);
}

TEST_CASE("linear mean square capacity values") {
    CHECK(linear_ms_capacity_bits(bern_channel(0.5)) ==
          doctest::Approx(0.1315172029168969).epsilon(1e-14));
    // constant fade has zero gain variance, so the linear capacity is AWGN
    CHECK(linear_ms_capacity_bits(ChannelParams(1.0, 1.0, FadingDistribution::point_mass(1.0))) == 0.5);
    CHECK(linear_ms_capacity_bits(bern_channel(1.0)) == 0.0);
}

TEST_CASE("scalar stabilizability threshold") {
    const ChannelParams params = bern_channel(0.5);
    CHECK(scalar_stabilizable(std::log2(1.1), params));
    CHECK_FALSE(scalar_stabilizable(std::log2(1.2), params));
    CHECK(scalar_stabilizable(0.0, params));  // lambda = 1 under positive capacity
    // boundary is strict
    CHECK_FALSE(scalar_stabilizable(mean_square_capacity_bits(params), params));
    CHECK_THROWS_AS(scalar_stabilizable(-0.1, params), std::invalid_argument);
}

TEST_CASE("scalar stabilizability equals lambda^2 rho < 1 algebraically") {
    RngStream rng(606, 0);
    for (int i = 0; i < 300; ++i) {
        const ChannelParams params = random_channel(rng);
        const double lambda = 1.0 + 2.0 * rng.next_uniform();
        const double rho = expected_contraction(params);
        CHECK(scalar_stabilizable(std::log2(lambda), params) == (lambda * lambda * rho < 1.0));
    }
}

TEST_CASE("zero-noise limit path") {
    // never-erased noiseless channel: stabilizable for any lambda
    const ChannelParams perfect(1.0, 0.0, FadingDistribution::point_mass(1.0));
    CHECK(scalar_stabilizable(std::log2(1e6), perfect));
    CHECK(necessity_bound_bits(perfect, 1) == std::numeric_limits<double>::infinity());

    // noiseless erasure channel: the classical eps < 1/lambda^2 law
    const ChannelParams erasure(1.0, 0.0, FadingDistribution::bernoulli(0.25));
    CHECK(scalar_stabilizable(std::log2(1.9), erasure));        // 1.9^2 * 0.25 = 0.9025
    CHECK_FALSE(scalar_stabilizable(std::log2(2.1), erasure));  // 2.1^2 * 0.25 = 1.1025
}

TEST_CASE("vector sufficiency") {
    const ChannelParams params = bern_channel(0.5);
    CHECK(vector_sufficient(SpectrumSpec({{0.0704, 1, 1}, {0.0704, 1, 1}}), params));
    CHECK_FALSE(vector_sufficient(SpectrumSpec({{std::log2(1.2), 1, 1}}), params));
    CHECK(vector_sufficient(SpectrumSpec({{0.0, 2, 1}, {0.0, 1, 2}}), params));
}

TEST_CASE("vector necessity reduces to the scalar test for one simple real mode") {
    RngStream rng(707, 0);
    for (int i = 0; i < 200; ++i) {
        const ChannelParams params = random_channel(rng);
        const double log_l = 0.4 * rng.next_uniform();
        CHECK(vector_necessary(SpectrumSpec({{log_l, 1, 1}}), params) ==
              scalar_stabilizable(log_l, params));
    }
}

TEST_CASE("vector necessity bounds match the closed Bernoulli forms") {
    const double eps = 0.8, power = 1.0, noise = 1.0;
    const ChannelParams params = bern_channel(eps, power, noise);

    const double per_mode = -0.5 * std::log2((noise + eps * power) / (noise + power));
    const double pair = -std::log2(eps + (1.0 - eps) * std::sqrt(noise / (noise + power)));
    CHECK(necessity_bound_bits(params, 1) == doctest::Approx(per_mode).epsilon(1e-12));
    CHECK(necessity_bound_bits(params, 2) == doctest::Approx(pair).epsilon(1e-12));
    CHECK(necessity_bound_bits(params, 1) == doctest::Approx(0.07600154672252497).epsilon(1e-12));
    CHECK(necessity_bound_bits(params, 2) == doctest::Approx(0.08708751380816049).epsilon(1e-12));

    // reference points either side of the pair bound (sum 0.10 vs 0.08)
    CHECK_FALSE(vector_necessary(SpectrumSpec({{0.05, 1, 1}, {0.05, 1, 1}}), params));
    CHECK(vector_necessary(SpectrumSpec({{0.07, 1, 1}, {0.01, 1, 1}}), params));
}

TEST_CASE("sufficiency implies necessity on random spectra") {
    RngStream rng(808, 0);
    for (int i = 0; i < 300; ++i) {
        const ChannelParams params = random_channel(rng);
        std::vector<SpectrumMode> modes;
        const std::size_t d = 1 + static_cast<std::size_t>(rng.next_uniform() * 3.0);
        for (std::size_t k = 0; k < d; ++k) {
            modes.push_back({0.3 * rng.next_uniform(),
                             1 + static_cast<int>(rng.next_uniform() * 2.0),
                             rng.next_uniform() < 0.5 ? 1 : 2});
        }
        const SpectrumSpec spec(modes);
        if (vector_sufficient(spec, params)) {
            CHECK(vector_necessary(spec, params));
        }
    }
}

TEST_CASE("necessity is monotone under shrinking eigenvalues") {
    RngStream rng(909, 0);
    for (int i = 0; i < 200; ++i) {
        const ChannelParams params = random_channel(rng);
        std::vector<SpectrumMode> modes = {{0.25 * rng.next_uniform(), 1, 1},
                                           {0.25 * rng.next_uniform(), 2, 1}};
        const bool before = vector_necessary(SpectrumSpec(modes), params);
        if (!before) continue;
        for (auto& m : modes) m.log_abs_eig *= rng.next_uniform();
        CHECK(vector_necessary(SpectrumSpec(modes), params));
    }
}

TEST_CASE("jensen ordering of shannon and mean square capacity") {
    RngStream rng(1001, 0);
    for (int i = 0; i < 300; ++i) {
        const ChannelParams params = random_channel(rng);
        CHECK(shannon_capacity_bits(params) >= mean_square_capacity_bits(params) - 1e-12);
    }
    // equality iff g^2 is constant across the support: a +-1 fade qualifies
    const ChannelParams sign_flip(1.3, 0.7,
                                  FadingDistribution({{-1.0, 0.5}, {1.0, 0.5}}));
    CHECK(shannon_capacity_bits(sign_flip) ==
          doctest::Approx(mean_square_capacity_bits(sign_flip)).epsilon(1e-14));
    const ChannelParams uneven(1.0, 1.0, FadingDistribution({{0.5, 0.5}, {1.0, 0.5}}));
    CHECK(shannon_capacity_bits(uneven) > mean_square_capacity_bits(uneven) + 1e-6);
}

TEST_CASE("bernoulli capacities order and decay along the erasure grid") {
    double prev_sh = 1e300, prev_msc = 1e300, prev_msl = 1e300;
    for (int i = 0; i <= 20; ++i) {
        const double eps = 0.05 * i;
        const ChannelParams params = bern_channel(std::min(eps, 1.0));
        const double sh = shannon_capacity_bits(params);
        const double msc = mean_square_capacity_bits(params);
        const double msl = linear_ms_capacity_bits(params);
        CHECK(sh >= msc - 1e-12);
        CHECK(msc >= msl - 1e-12);
        CHECK(sh <= prev_sh + 1e-12);
        CHECK(msc <= prev_msc + 1e-12);
        CHECK(msl <= prev_msl + 1e-12);
        prev_sh = sh;
        prev_msc = msc;
        prev_msl = msl;
    }
}

TEST_CASE("capacity report bundles the three capacities and rho") {
    const CapacityReport zero_eps = capacity_report(bern_channel(0.0));
    CHECK(zero_eps.shannon_bits == 0.5);
    CHECK(zero_eps.msc_bits == 0.5);
    CHECK(zero_eps.msl_bits == 0.5);

    const CapacityReport dead = capacity_report(bern_channel(1.0));
    CHECK(dead.shannon_bits == 0.0);
    CHECK(dead.msc_bits == 0.0);
    CHECK(dead.msl_bits == 0.0);
    CHECK(dead.contraction == 1.0);

    const CapacityReport half = capacity_report(bern_channel(0.5));
    CHECK(half.shannon_bits == doctest::Approx(0.25));
    CHECK(half.msc_bits == doctest::Approx(0.20752).epsilon(1e-4));
    CHECK(half.msl_bits == doctest::Approx(0.13152).epsilon(1e-4));
    CHECK(half.contraction == 0.75);

    // report invariants on random channels
    RngStream rng(1102, 0);
    for (int i = 0; i < 100; ++i) {
        const CapacityReport report = capacity_report(random_channel(rng));
        CHECK(report.contraction > 0.0);
        CHECK(report.contraction <= 1.0);
        CHECK(report.msc_bits >= 0.0);
        CHECK(report.shannon_bits >= report.msc_bits - 1e-12);
        CHECK(report.msc_bits == -0.5 * std::log2(report.contraction) + 0.0);
    }
}

TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(SpectrumSpec({}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({{-0.1, 1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({{0.1, 0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({{0.1, 1, 3}}), std::invalid_argument);
}
