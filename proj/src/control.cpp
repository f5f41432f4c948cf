#include "mscap/control.hpp"

#include <cmath>
#include <stdexcept>

namespace mscap {

namespace {

// y = M x for row-major n*n M; y must not alias x.
void mat_vec_into(const std::vector<double>& m, const std::vector<double>& x, std::size_t n,
                  std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += m[i * n + k] * x[k];
        }
        y[i] = acc;
    }
}

std::vector<double> mat_vec(const std::vector<double>& m, const std::vector<double>& x, std::size_t n) {
    std::vector<double> y(n, 0.0);
    mat_vec_into(m, x, n, y);
    return y;
}

void mat_mul_into(const std::vector<double>& a, const std::vector<double>& b, std::size_t n,
                  std::vector<double>& c) {
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

std::vector<double> mat_mul(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
    std::vector<double> c(n * n, 0.0);
    mat_mul_into(a, b, n, c);
    return c;
}

std::vector<double> identity(std::size_t n) {
    std::vector<double> id(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1.0;
    return id;
}

// Solves M x = rhs by Gaussian elimination with partial pivoting. Reports
// singularity against a pivot threshold relative to the largest entry.
std::vector<double> solve_or_throw(std::vector<double> m, std::vector<double> rhs, std::size_t n,
                                   const char* what) {
    double scale = 1.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale * static_cast<double>(n);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(m[row * n + col]) > std::abs(m[pivot * n + col])) pivot = row;
        }
        if (std::abs(m[pivot * n + col]) <= tol) {
            throw std::domain_error(what);
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m[col * n + j], m[pivot * n + j]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = m[row * n + col] / m[col * n + col];
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) {
                m[row * n + j] -= factor * m[col * n + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc -= m[i * n + j] * x[j];
        }
        x[i] = acc / m[i * n + i];
    }
    return x;
}

}  // namespace

PlantSpec PlantSpec::scalar(double lambda, double b) {
    return diagonal({lambda}, {b});
}

PlantSpec PlantSpec::diagonal(const std::vector<double>& eigenvalues, const std::vector<double>& b) {
    if (eigenvalues.empty() || eigenvalues.size() != b.size()) {
        throw std::invalid_argument("eigenvalue and input-vector lengths must match");
    }
    const std::size_t n = eigenvalues.size();
    PlantSpec plant;
    plant.n = n;
    plant.a.assign(n * n, 0.0);
    plant.b = b;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(eigenvalues[i]) || std::abs(eigenvalues[i]) < 1.0) {
            throw std::invalid_argument("every open-loop eigenvalue must satisfy |lambda| >= 1");
        }
        plant.a[i * n + i] = eigenvalues[i];
    }
    return plant;
}

std::vector<double> deadbeat_gain(const PlantSpec& plant) {
    const std::size_t n = plant.n;
    if (n == 0 || plant.a.size() != n * n || plant.b.size() != n) {
        throw std::invalid_argument("malformed plant");
    }

    // Controllability matrix, columns B, AB, ..., A^{n-1}B.
    std::vector<double> ctrb(n * n, 0.0);
    std::vector<double> col = plant.b;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) ctrb[i * n + j] = col[i];
        col = mat_vec(plant.a, col, n);
    }

    // Ackermann with all poles at the origin: K = -e_n' C^{-1} A^n.
    std::vector<double> ctrb_t(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) ctrb_t[i * n + j] = ctrb[j * n + i];
    }
    std::vector<double> e_last(n, 0.0);
    e_last[n - 1] = 1.0;
    const std::vector<double> q = solve_or_throw(std::move(ctrb_t), std::move(e_last), n,
                                                 "uncontrollable pair");

    std::vector<double> a_pow = identity(n);
    for (std::size_t k = 0; k < n; ++k) a_pow = mat_mul(a_pow, plant.a, n);

    std::vector<double> gain(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += q[i] * a_pow[i * n + j];
        gain[j] = -acc;
    }
    return gain;
}

ControllerState make_controller(const PlantSpec& plant, std::vector<double> gain, double overflow_cap) {
    if (gain.size() != plant.n) {
        throw std::invalid_argument("gain dimension mismatch");
    }
    ControllerState ctrl;
    ctrl.gain = std::move(gain);
    ctrl.a_power = identity(plant.n);
    ctrl.conv_sum.assign(plant.n, 0.0);
    ctrl.t = 0;
    ctrl.overflow_cap = overflow_cap;
    ctrl.scratch_vec.assign(plant.n, 0.0);
    ctrl.scratch_mat.assign(plant.n * plant.n, 0.0);
    return ctrl;
}

double control_input(ControllerState& ctrl, const PlantSpec& plant, std::span<const double> xhat) {
    const std::size_t n = plant.n;
    if (xhat.size() != n) {
        throw std::invalid_argument("estimate dimension mismatch");
    }

    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double zi = ctrl.conv_sum[i];
        for (std::size_t k = 0; k < n; ++k) {
            zi += ctrl.a_power[i * n + k] * xhat[k];
        }
        u += ctrl.gain[i] * zi;
    }
    if (!std::isfinite(u) || std::abs(u) > ctrl.overflow_cap) {
        throw std::overflow_error("horizon overflow");
    }

    mat_vec_into(plant.a, ctrl.conv_sum, n, ctrl.scratch_vec);
    for (std::size_t i = 0; i < n; ++i) ctrl.scratch_vec[i] += plant.b[i] * u;
    std::swap(ctrl.conv_sum, ctrl.scratch_vec);
    mat_mul_into(plant.a, ctrl.a_power, n, ctrl.scratch_mat);
    std::swap(ctrl.a_power, ctrl.scratch_mat);
    ctrl.t += 1;

    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ctrl.conv_sum[i]) || std::abs(ctrl.conv_sum[i]) > ctrl.overflow_cap) {
            throw std::overflow_error("horizon overflow");
        }
    }
    for (double v : ctrl.a_power) {
        if (!std::isfinite(v) || std::abs(v) > ctrl.overflow_cap) {
            throw std::overflow_error("horizon overflow");
        }
    }
    return u;
}

void plant_advance(const PlantSpec& plant, std::vector<double>& x, double u) {
    const std::size_t n = plant.n;
    if (n <= 32) {
        double next[32];
        for (std::size_t i = 0; i < n; ++i) {
            double acc = plant.b[i] * u;
            for (std::size_t k = 0; k < n; ++k) {
                acc += plant.a[i * n + k] * x[k];
            }
            next[i] = acc;
        }
        for (std::size_t i = 0; i < n; ++i) x[i] = next[i];
        return;
    }
    std::vector<double> next = mat_vec(plant.a, x, n);
    for (std::size_t i = 0; i < n; ++i) next[i] += plant.b[i] * u;
    x = std::move(next);
}

}  // namespace mscap
