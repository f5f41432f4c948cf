#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mscap/capacity.hpp"
#include "mscap/channel.hpp"
#include "mscap/codec.hpp"
#include "mscap/control.hpp"

namespace mscap {

enum class Verdict { Stable, Unstable, Inconclusive };

/// Which trial kernel runs. Both produce bit-identical results: trials are
/// accumulated in fixed-size blocks and the block partials are reduced in
/// block order, so the arithmetic never depends on the thread count. The
/// serial kernel is the reference the parallel one is tested against.
enum class Execution { Serial, Parallel };

const char* verdict_name(Verdict v);

struct SimConfig {
    PlantSpec plant;
    ChannelParams channel;
    std::vector<double> prior_var;  // diagonal of the x0 covariance, > 0 each
    std::uint64_t trials = 1;
    std::size_t horizon = 2;
    std::uint64_t master_seed = 0;
    std::optional<Schedule> schedule;  // present iff plant.n > 1
    double overflow_cap = 1e150;
};

/// Per-step ensemble means over the trial population. Lists all have length
/// horizon; entry t describes the system right after the t-th channel use.
struct EnsembleStats {
    std::vector<double> mean_sq_state;        // E||x_t||^2 (zero in estimation runs)
    std::vector<double> mean_sq_error;        // E||e_t||^2, e = estimate - x0
    std::vector<double> mean_error;           // E[sum_j e_{j,t}]
    std::vector<double> mean_sq_error_sq;     // E||e_t||^4
    std::vector<double> mean_tracked_var;     // E[sum_j v_{j,t}]
    std::vector<double> mean_tracked_var_sq;  // E[(sum_j v_{j,t})^2]
    std::vector<double> power_usage;          // E[s_t^2]
    std::vector<double> power_usage_sq;       // E[s_t^4]

    /// Deterministic fade-averaged reference: the recursion
    /// E{e_t^2} = rho * E{e_{t-1}^2} applied slot-by-slot through the
    /// schedule. Consecutive entries of a coordinate differ by exactly rho.
    std::vector<double> expected_error_var;

    std::uint64_t trials = 0;
    std::uint64_t diverged_count = 0;
    Verdict verdict = Verdict::Inconclusive;
    double tail_slope = 0.0;
    bool tail_slope_defined = false;
};

/// Open-loop estimation of x0 only: encode -> transmit -> decode per step.
EnsembleStats run_estimation(const SimConfig& config, Execution exec = Execution::Parallel);

/// Full loop: codec refines the x0 estimate, the deadbeat controller applies
/// the estimate-then-control law, the plant advances. Trials that trip the
/// overflow cap count as diverged (they are unstable evidence, not dropouts).
/// Throws before any trial if the plant is uncontrollable.
EnsembleStats run_closed_loop(const SimConfig& config, Execution exec = Execution::Parallel);

/// Least-squares slope of ln(series) per step over the trailing
/// tail_fraction of entries; the +-0.01 dead band maps to the verdict.
/// A trajectory that collapsed to exact zero is Stable outright, and a
/// diverged fraction above 1% overrides everything to Unstable.
Verdict classify_stability(const EnsembleStats& stats, double tail_fraction = 0.5);

/// Slope helper behind classify_stability; `defined` is false when fewer
/// than two positive entries exist in the tail.
double tail_log_slope(const std::vector<double>& series, double tail_fraction, bool& defined);

struct SweepRow {
    double epsilon;
    double shannon_bits;
    double msc_bits;
    double msl_bits;
};

/// Bernoulli-fading capacity table over the given erasure grid.
std::vector<SweepRow> sweep_capacity(const std::vector<double>& eps_grid, double power,
                                     double noise_var);

enum class RegionLabel { Sufficient, Gap, Excluded };

const char* region_label_name(RegionLabel label);

struct RegionPoint {
    RegionLabel label;
    bool linear_ok;  // log|l1| + log|l2| < C_MSL
};

/// Classification of one (log2|l1|, log2|l2|) point for a two-mode real
/// simple spectrum over the given channel.
RegionPoint classify_region_point(double log_l1, double log_l2, const ChannelParams& params);

struct RegionRow {
    double log_l1;
    double log_l2;
    RegionLabel label;
    bool linear_ok;
};

/// steps x steps grid over [0, grid_max]^2, row-major in log_l1 then log_l2.
std::vector<RegionRow> region_grid(double eps, double power, double noise_var, double grid_max,
                                   std::size_t steps);

}  // namespace mscap
