#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mscap {

/// Single-input plant x_{t+1} = A x_t + B u_t with every eigenvalue of A on
/// or outside the unit circle. A is row-major n*n.
struct PlantSpec {
    std::vector<double> a;
    std::vector<double> b;
    std::size_t n = 0;

    static PlantSpec scalar(double lambda, double b = 1.0);

    /// Diagonal A from the eigenvalue list (distinct values keep (A,B)
    /// controllable when every B component is nonzero).
    static PlantSpec diagonal(const std::vector<double>& eigenvalues, const std::vector<double>& b);
};

/// Deadbeat gain K making (A + B K) nilpotent (Ackermann placement of every
/// pole at the origin). Throws std::domain_error("uncontrollable pair") when
/// the controllability matrix is singular to a relative pivot threshold.
std::vector<double> deadbeat_gain(const PlantSpec& plant);

/// Running state of u_t = K (A^t xhat_t + sum_{i=1..t} A^{t-i} B u_{i-1}).
struct ControllerState {
    std::vector<double> gain;      // K
    std::vector<double> a_power;   // A^t, identity at t = 0
    std::vector<double> conv_sum;  // the control convolution, zero at t = 0
    std::size_t t = 0;
    double overflow_cap = 1e150;

    // Reused by control_input so the per-step updates never allocate.
    std::vector<double> scratch_vec;
    std::vector<double> scratch_mat;
};

ControllerState make_controller(const PlantSpec& plant, std::vector<double> gain,
                                double overflow_cap = 1e150);

/// Computes u_t from the current estimate and advances the internal state
/// (conv_sum <- A conv_sum + B u, A^t <- A * A^t). A^t is unbounded for
/// unstable A; once any intermediate passes overflow_cap the run cannot be
/// continued meaningfully and std::overflow_error("horizon overflow") is
/// thrown for the caller to treat as divergence.
double control_input(ControllerState& ctrl, const PlantSpec& plant, std::span<const double> xhat);

/// x <- A x + B u, the plant step. Shared by the simulator and tests.
void plant_advance(const PlantSpec& plant, std::vector<double>& x, double u);

}  // namespace mscap
