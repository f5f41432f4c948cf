#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mscap/channel.hpp"

using namespace mscap;

TEST_CASE("fading law validation") {
    CHECK_THROWS_AS(FadingDistribution({}), std::invalid_argument);
    CHECK_THROWS_AS(FadingDistribution({{1.0, 0.6}, {0.0, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(FadingDistribution({{1.0, -0.1}, {0.0, 1.1}}), std::invalid_argument);
    CHECK_THROWS_AS(FadingDistribution::bernoulli(1.5), std::invalid_argument);
    CHECK_NOTHROW(FadingDistribution({{0.5, 0.25}, {1.0, 0.75}}));

    const auto bern = FadingDistribution::bernoulli(0.3);
    CHECK(bern.atoms().size() == 2);
    CHECK(bern.erasure_probability() == doctest::Approx(0.3));
    CHECK(FadingDistribution::point_mass(2.0).erasure_probability() == 0.0);
}

TEST_CASE("channel params validation") {
    CHECK_THROWS_AS(ChannelParams(-1.0, 1.0, FadingDistribution::point_mass(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(1.0, -0.5, FadingDistribution::point_mass(1.0)),
                    std::invalid_argument);
    // zero noise together with an all-zero fade is senseless
    CHECK_THROWS_AS(ChannelParams(1.0, 0.0, FadingDistribution::point_mass(0.0)),
                    std::invalid_argument);
    CHECK_NOTHROW(ChannelParams(1.0, 0.0, FadingDistribution::point_mass(1.0)));
}

TEST_CASE("sample_fade degenerate laws") {
    RngStream rng(7, 0);
    const auto point = FadingDistribution::point_mass(1.0);
    for (int i = 0; i < 10; ++i) CHECK(sample_fade(point, rng) == 1.0);

    const auto never_fail = FadingDistribution::bernoulli(0.0);
    for (int i = 0; i < 10; ++i) CHECK(sample_fade(never_fail, rng) == 1.0);
}

TEST_CASE("sample_fade matches atom frequencies (law of large numbers)") {
    RngStream rng(11, 5);
    const auto bern = FadingDistribution::bernoulli(0.5);
    const int n = 1000000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        if (sample_fade(bern, rng) == 0.0) ++zeros;
    }
    const double freq = static_cast<double>(zeros) / n;
    CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("transmit is the identity on a noiseless unit-gain channel") {
    const ChannelParams params(4.0, 0.0, FadingDistribution::point_mass(1.0));
    RngStream rng(3, 0);
    for (double s : {-2.0, 0.0, 0.37, 11.0}) {
        const auto use = transmit(params, s, rng);
        CHECK(use.output == s);
        CHECK(use.gain == 1.0);
    }
}

TEST_CASE("transmit output is g*s + n") {
    // Noiseless with gain 0.5 pins the multiplicative part exactly.
    const ChannelParams half(1.0, 0.0, FadingDistribution::point_mass(0.5));
    RngStream rng(5, 0);
    CHECK(transmit(half, 1.2, rng).output == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("transmit noise moments at zero input") {
    const double noise_var = 0.8;
    const ChannelParams params(1.0, noise_var, FadingDistribution::bernoulli(0.4));
    RngStream rng(17, 2);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto use = transmit(params, 0.0, rng);
        sum += use.output;
        sum_sq += use.output * use.output;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 * std::sqrt(noise_var / n));
    CHECK(std::abs(var - noise_var) < 3.0 * std::sqrt(2.0) * noise_var / std::sqrt(n));
}

TEST_CASE("fade and noise sequence is reproducible per (seed, stream)") {
    const ChannelParams params(1.0, 1.0, FadingDistribution::bernoulli(0.3));
    RngStream a(123, 9);
    RngStream b(123, 9);
    for (int i = 0; i < 200; ++i) {
        const auto ua = transmit(params, 1.0, a);
        const auto ub = transmit(params, 1.0, b);
        CHECK(ua.output == ub.output);
        CHECK(ua.gain == ub.gain);
    }
}

TEST_CASE("instantaneous capacity in nats") {
    const ChannelParams unit(1.0, 1.0, FadingDistribution::point_mass(1.0));
    CHECK(instantaneous_capacity_nats(unit, 0.0) == 0.0);
    CHECK(instantaneous_capacity_nats(unit, 1.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));

    const ChannelParams p3(3.0, 1.0, FadingDistribution::point_mass(1.0));
    CHECK(instantaneous_capacity_nats(p3, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const ChannelParams noiseless(1.0, 0.0, FadingDistribution::point_mass(1.0));
    CHECK_THROWS_AS(instantaneous_capacity_nats(noiseless, 1.0), std::domain_error);
}
