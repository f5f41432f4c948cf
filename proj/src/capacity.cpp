#include "mscap/capacity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mscap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-atom contraction factor. The two degenerate limits: P == 0 carries no
// signal at all (factor 1), and noise_var == 0 makes every non-erased use a
// perfect observation (factor 0; erased uses still carry nothing).
double atom_contraction(double gain, double power, double noise_var) {
    if (power == 0.0) return 1.0;
    if (noise_var == 0.0) return gain == 0.0 ? 1.0 : 0.0;
    return noise_var / (noise_var + gain * gain * power);
}

}  // namespace

SpectrumSpec::SpectrumSpec(std::vector<SpectrumMode> mode_list) : modes(std::move(mode_list)) {
    if (modes.empty()) {
        throw std::invalid_argument("spectrum needs at least one mode");
    }
    for (const auto& m : modes) {
        if (!(m.log_abs_eig >= 0.0) || !std::isfinite(m.log_abs_eig)) {
            throw std::invalid_argument("log|lambda| must be finite and >= 0");
        }
        if (m.multiplicity < 1) {
            throw std::invalid_argument("mode multiplicity must be >= 1");
        }
        if (m.real_factor != 1 && m.real_factor != 2) {
            throw std::invalid_argument("real_factor must be 1 (real) or 2 (complex pair)");
        }
    }
}

double expected_contraction(const ChannelParams& params) {
    if (params.noise_var == 0.0) {
        throw std::domain_error("contraction undefined at zero noise; use the stabilizability predicates");
    }
    double sum = 0.0;
    for (const auto& atom : params.fading.atoms()) {
        sum += atom.probability * atom_contraction(atom.gain, params.power, params.noise_var);
    }
    return sum;
}

double expected_contraction_limit(const ChannelParams& params) {
    double sum = 0.0;
    for (const auto& atom : params.fading.atoms()) {
        sum += atom.probability * atom_contraction(atom.gain, params.power, params.noise_var);
    }
    return sum;
}

double mean_square_capacity_bits(const ChannelParams& params) {
    return -0.5 * std::log2(expected_contraction(params)) + 0.0;  // + 0.0 folds -0 into +0
}

double shannon_capacity_bits(const ChannelParams& params) {
    if (params.noise_var == 0.0) {
        throw std::domain_error("infinite capacity");
    }
    double sum = 0.0;
    for (const auto& atom : params.fading.atoms()) {
        sum += atom.probability * 0.5 * std::log2(1.0 + atom.gain * atom.gain * params.power / params.noise_var);
    }
    return sum;
}

double linear_ms_capacity_bits(const ChannelParams& params) {
    if (params.noise_var == 0.0) {
        throw std::domain_error("infinite capacity");
    }
    double mean_g = 0.0;
    double mean_g2 = 0.0;
    for (const auto& atom : params.fading.atoms()) {
        mean_g += atom.probability * atom.gain;
        mean_g2 += atom.probability * atom.gain * atom.gain;
    }
    const double var_g = mean_g2 - mean_g * mean_g;
    return 0.5 * std::log2(1.0 + mean_g * mean_g * params.power / (var_g * params.power + params.noise_var));
}

double necessity_bound_bits(const ChannelParams& params, int v) {
    if (v < 1) {
        throw std::invalid_argument("necessity bound needs v >= 1");
    }
    double expect = 0.0;
    for (const auto& atom : params.fading.atoms()) {
        const double f = atom_contraction(atom.gain, params.power, params.noise_var);
        expect += atom.probability * std::pow(f, 1.0 / static_cast<double>(v));
    }
    if (expect == 0.0) return kInf;  // zero-noise, never-erased limit
    return -(static_cast<double>(v) / 2.0) * std::log2(expect) + 0.0;
}

bool scalar_stabilizable(double log_abs_lambda, const ChannelParams& params) {
    if (!(log_abs_lambda >= 0.0)) {
        throw std::invalid_argument("log|lambda| must be >= 0");
    }
    return log_abs_lambda < necessity_bound_bits(params, 1);
}

bool vector_sufficient(const SpectrumSpec& spec, const ChannelParams& params) {
    double weighted_sum = 0.0;
    for (const auto& m : spec.modes) {
        weighted_sum += static_cast<double>(m.real_factor) * m.multiplicity * m.log_abs_eig;
    }
    return weighted_sum < necessity_bound_bits(params, 1);
}

bool vector_necessary(const SpectrumSpec& spec, const ChannelParams& params) {
    const std::size_t d = spec.modes.size();
    std::vector<int> v(d, 0);
    // Enumerate every tuple (v_1..v_d) with v_i in {0..m_i}, skipping all-zero.
    while (true) {
        std::size_t i = 0;
        while (i < d && v[i] == spec.modes[i].multiplicity) {
            v[i] = 0;
            ++i;
        }
        if (i == d) break;
        ++v[i];

        int total_dim = 0;
        double lhs = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            total_dim += spec.modes[k].real_factor * v[k];
            lhs += static_cast<double>(spec.modes[k].real_factor) * v[k] * spec.modes[k].log_abs_eig;
        }
        if (!(lhs < necessity_bound_bits(params, total_dim))) {
            return false;
        }
    }
    return true;
}

CapacityReport capacity_report(const ChannelParams& params) {
    return {
        shannon_capacity_bits(params),
        mean_square_capacity_bits(params),
        linear_ms_capacity_bits(params),
        expected_contraction(params),
    };
}

}  // namespace mscap
