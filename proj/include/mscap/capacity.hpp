#pragma once

#include <vector>

#include "mscap/channel.hpp"

namespace mscap {

/// Unstable spectrum of the open-loop system in real Jordan terms: each mode
/// is (log2|lambda|, algebraic multiplicity, 1 for a real eigenvalue or 2 for
/// a complex pair). All logs are base 2, the same unit as the capacities.
struct SpectrumMode {
    double log_abs_eig;  // log2|lambda_i|, >= 0
    int multiplicity;    // m_i >= 1
    int real_factor;     // a_i: 1 real, 2 complex pair
};

struct SpectrumSpec {
    std::vector<SpectrumMode> modes;

    explicit SpectrumSpec(std::vector<SpectrumMode> mode_list);
};

struct CapacityReport {
    double shannon_bits;
    double msc_bits;
    double msl_bits;
    double contraction;  // rho = E{noise_var/(noise_var + g^2 P)}
};

/// rho = sum_k p_k * noise_var/(noise_var + g_k^2 P), the per-use average
/// shrink factor of the optimal estimation error variance. Exact finite sum,
/// in (0, 1]. Throws std::domain_error if noise_var == 0 (use the predicates,
/// which take the limit path).
double expected_contraction(const ChannelParams& params);

/// Same sum with the degenerate limits folded in instead of throwing:
/// zero noise contributes 0 per non-erased atom and 1 per erased one, and
/// zero power contributes 1 everywhere.
double expected_contraction_limit(const ChannelParams& params);

/// Mean square capacity with causal coding: -0.5*log2(rho), bits per use.
double mean_square_capacity_bits(const ChannelParams& params);

/// Shannon capacity with receiver fade knowledge: sum_k p_k * 0.5*log2(1 + g_k^2 P / noise_var).
double shannon_capacity_bits(const ChannelParams& params);

/// Mean square capacity restricted to linear coding:
/// 0.5*log2(1 + mean_g^2 P / (var_g P + noise_var)).
double linear_ms_capacity_bits(const ChannelParams& params);

/// Necessity-family bound: -(v/2)*log2 E{(noise_var/(noise_var+g^2 P))^(1/v)}
/// for integer v >= 1. v=1 reproduces mean_square_capacity_bits. Returns
/// +infinity on the zero-noise limit path when the fade is never zero.
double necessity_bound_bits(const ChannelParams& params, int v);

/// Scalar test of log2|lambda| < C_MSC, strict; boundary is false.
/// Handles noise_var == 0 via the limit path instead of dividing by zero.
bool scalar_stabilizable(double log_abs_lambda, const ChannelParams& params);

/// Sufficiency: sum_i a_i m_i log2|lambda_i| < C_MSC, strict.
bool vector_sufficient(const SpectrumSpec& spec, const ChannelParams& params);

/// Necessity: for every tuple (v_1..v_d), v_i in {0..m_i}, not all zero,
/// sum_i a_i v_i log2|lambda_i| < necessity_bound_bits(params, sum_i a_i v_i).
bool vector_necessary(const SpectrumSpec& spec, const ChannelParams& params);

CapacityReport capacity_report(const ChannelParams& params);

}  // namespace mscap
