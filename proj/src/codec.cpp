#include "mscap/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mscap {

namespace {

// Below this the chain is treated as converged; keeps sqrt(P/v) finite and
// both ends of the link consistent. Reached only after ~900 halvings.
constexpr double kMinTrackedVar = 1e-280;

}  // namespace

ScalarCodecState make_scalar_codec(double prior_var) {
    if (!(prior_var > 0.0) || !std::isfinite(prior_var)) {
        throw std::invalid_argument("prior variance must be finite and > 0");
    }
    return {0.0, prior_var, 0, prior_var};
}

double encode(const ScalarCodecState& state, double x0, double power) {
    if (state.step == 0) {
        return std::sqrt(power / state.prior_var) * x0;
    }
    if (state.cond_error_var <= kMinTrackedVar) {
        return 0.0;
    }
    return std::sqrt(power / state.cond_error_var) * (state.estimate - x0);
}

ScalarCodecState decode_update(const ScalarCodecState& state, double r, double g, double power,
                               double noise_var) {
    if (!std::isfinite(r)) {
        throw std::overflow_error("channel output overflow");
    }
    if (!(power > 0.0)) {
        throw std::invalid_argument("codec needs a positive power budget");
    }
    ScalarCodecState next = state;
    if (state.step == 0) {
        next.estimate = std::sqrt(state.prior_var / power) * r;
        next.cond_error_var =
            (g - 1.0) * (g - 1.0) * state.prior_var + state.prior_var * noise_var / power;
    } else if (state.cond_error_var > kMinTrackedVar) {
        const double denom = noise_var + g * g * power;
        if (denom > 0.0) {
            const double gain = g * std::sqrt(power * state.cond_error_var) / denom;
            next.estimate = state.estimate - gain * r;
            next.cond_error_var = state.cond_error_var * (noise_var / denom);
        }
        // denom == 0 means zero noise and an erased use: nothing was learned.
    }
    next.step = state.step + 1;
    return next;
}

std::size_t Schedule::slots_of(int coordinate) const {
    return static_cast<std::size_t>(std::count(slot_owner.begin(), slot_owner.end(), coordinate));
}

Schedule make_schedule(const std::vector<double>& alphas, std::size_t tau) {
    if (alphas.empty() || tau == 0) {
        throw std::invalid_argument("schedule needs shares and a positive period");
    }
    double total = 0.0;
    std::size_t positive = 0;
    for (double a : alphas) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("shares must be finite and >= 0");
        }
        if (a > 0.0) ++positive;
        total += a;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("shares must sum to 1");
    }
    if (tau < positive) {
        throw std::invalid_argument("period too short");
    }

    const std::size_t n = alphas.size();
    std::vector<std::size_t> count(n, 0);
    std::vector<std::pair<double, std::size_t>> remainder(n);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double quota = alphas[j] * static_cast<double>(tau);
        count[j] = static_cast<std::size_t>(std::floor(quota));
        remainder[j] = {quota - std::floor(quota), j};
        assigned += count[j];
    }
    // Leftover slots to the largest remainders, lower index first on ties.
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < tau; ++k) {
        ++count[remainder[k % n].second];
        ++assigned;
    }

    // Every positive-share coordinate must own at least one slot; transfer
    // from the biggest owner when the remainder pass starved one.
    for (;;) {
        std::size_t starved = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (alphas[j] > 0.0 && count[j] == 0 &&
                (starved == n || alphas[j] > alphas[starved])) {
                starved = j;
            }
        }
        if (starved == n) break;
        std::size_t donor = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (count[j] > count[donor]) donor = j;
        }
        --count[donor];
        ++count[starved];
    }

    // Spread each coordinate's slots evenly through the period.
    std::vector<std::pair<double, int>> placed;
    placed.reserve(tau);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < count[j]; ++k) {
            placed.emplace_back((static_cast<double>(k) + 0.5) / static_cast<double>(count[j]),
                                static_cast<int>(j));
        }
    }
    std::sort(placed.begin(), placed.end());

    Schedule schedule;
    schedule.period = tau;
    schedule.target_share = alphas;
    schedule.slot_owner.reserve(tau);
    for (const auto& [pos, j] : placed) {
        schedule.slot_owner.push_back(j);
    }
    return schedule;
}

VectorCodecState make_vector_codec(const std::vector<double>& prior_vars, Schedule schedule) {
    if (prior_vars.empty()) {
        throw std::invalid_argument("need at least one coordinate");
    }
    if (schedule.target_share.size() != prior_vars.size()) {
        throw std::invalid_argument("schedule shares must match coordinate count");
    }
    VectorCodecState state;
    state.coords.reserve(prior_vars.size());
    for (double pv : prior_vars) {
        state.coords.push_back(make_scalar_codec(pv));
    }
    state.schedule = std::move(schedule);
    return state;
}

VectorCodecState vector_round(const VectorCodecState& state, std::span<const double> x0,
                              const ChannelParams& channel, RngStream& rng, RoundRecord* record) {
    if (x0.size() != state.coords.size()) {
        throw std::invalid_argument("x0 dimension mismatch");
    }
    VectorCodecState next = state;
    const int owner = state.schedule.slot_owner[state.cursor];
    const double s = encode(state.coords[owner], x0[owner], channel.power);
    const ChannelUse use = transmit(channel, s, rng);
    next.coords[owner] =
        decode_update(state.coords[owner], use.output, use.gain, channel.power, channel.noise_var);
    next.cursor = (state.cursor + 1) % state.schedule.period;
    if (record != nullptr) {
        *record = {owner, s, use.output, use.gain};
    }
    return next;
}

}  // namespace mscap
