#include "mscap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mscap {

namespace {

// Trials are summed in fixed blocks and block partials are reduced in block
// order; this keeps every accumulation bit-identical for any thread count.
constexpr std::uint64_t kTrialBlock = 64;

// Per-step population moments, interleaved so one step's writes stay on one
// cache line.
enum Field : std::size_t {
    kSqState = 0,
    kSqErr,
    kErr,
    kSqErrSq,
    kVar,
    kVarSq,
    kPow2,
    kPow4,
    kFieldCount,
};

struct BlockAccum {
    std::vector<double> data;  // horizon * kFieldCount, [t*kFieldCount + field]
    std::uint64_t diverged = 0;

    explicit BlockAccum(std::size_t horizon) : data(horizon * kFieldCount, 0.0) {}

    double* step(std::size_t t) { return data.data() + t * kFieldCount; }

    void add(const BlockAccum& other) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            data[i] += other.data[i];
        }
        diverged += other.diverged;
    }
};

struct StepSnapshot {
    double e1 = 0.0;
    double e2 = 0.0;
    double e4 = 0.0;
    double v = 0.0;
    double v2 = 0.0;
    double p2 = 0.0;
    double p4 = 0.0;
};

Schedule effective_schedule(const SimConfig& config) {
    if (config.plant.n == 1) {
        return make_schedule({1.0}, 1);
    }
    return *config.schedule;
}

void validate_config(const SimConfig& config) {
    const std::size_t n = config.plant.n;
    if (n == 0) throw std::invalid_argument("plant has no state");
    if (config.trials < 1) throw std::invalid_argument("need at least one trial");
    if (config.horizon < 2) throw std::invalid_argument("horizon must be >= 2");
    if (config.prior_var.size() != n) {
        throw std::invalid_argument("prior variance diagonal must match the plant dimension");
    }
    for (double pv : config.prior_var) {
        if (!(pv > 0.0) || !std::isfinite(pv)) {
            throw std::invalid_argument("prior variances must be finite and > 0");
        }
    }
    if (!(config.channel.power > 0.0)) {
        throw std::invalid_argument("simulation needs a positive power budget");
    }
    if (config.schedule.has_value() != (n > 1)) {
        throw std::invalid_argument("schedule must be present exactly when the plant is vector-valued");
    }
    if (n > 1) {
        if (config.schedule->target_share.size() != n) {
            throw std::invalid_argument("schedule shares must match the plant dimension");
        }
    }
    if (!(config.overflow_cap > 0.0)) {
        throw std::invalid_argument("overflow cap must be positive");
    }
}

// One codec use shared by both trial kernels: the slot owner transmits, its
// chain updates, and the step's population moments land in `acc[t]`.
void codec_step(const SimConfig& config, const Schedule& schedule,
                std::vector<ScalarCodecState>& coords, std::size_t& cursor,
                const std::vector<double>& x0, RngStream& rng, std::size_t t, BlockAccum& acc,
                StepSnapshot& snap) {
    const int owner = schedule.slot_owner[cursor];
    cursor = (cursor + 1) % schedule.period;

    const double s = encode(coords[owner], x0[owner], config.channel.power);
    const ChannelUse use = transmit(config.channel, s, rng);
    coords[owner] = decode_update(coords[owner], use.output, use.gain, config.channel.power,
                                  config.channel.noise_var);

    double e_sum = 0.0;
    double e_sq = 0.0;
    double v_sum = 0.0;
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const double e = coords[j].estimate - x0[j];
        e_sum += e;
        e_sq += e * e;
        v_sum += coords[j].cond_error_var;
    }
    snap.e1 = e_sum;
    snap.e2 = e_sq;
    snap.e4 = e_sq * e_sq;
    snap.v = v_sum;
    snap.v2 = v_sum * v_sum;
    snap.p2 = s * s;
    snap.p4 = snap.p2 * snap.p2;

    double* row = acc.step(t);
    row[kErr] += snap.e1;
    row[kSqErr] += snap.e2;
    row[kSqErrSq] += snap.e4;
    row[kVar] += snap.v;
    row[kVarSq] += snap.v2;
    row[kPow2] += snap.p2;
    row[kPow4] += snap.p4;
}

// A diverged trial keeps contributing: the cap for the state (unstable
// evidence) and its last observed codec moments for the rest. Dropping it
// instead would bias the ensemble toward stability.
void fill_diverged(BlockAccum& acc, std::size_t from, std::size_t horizon, double cap,
                   const StepSnapshot& last) {
    for (std::size_t t = from; t < horizon; ++t) {
        double* row = acc.step(t);
        row[kSqState] += cap;
        row[kErr] += last.e1;
        row[kSqErr] += last.e2;
        row[kSqErrSq] += last.e4;
        row[kVar] += last.v;
        row[kVarSq] += last.v2;
        row[kPow2] += last.p2;
        row[kPow4] += last.p4;
    }
}

std::vector<double> draw_initial_state(const SimConfig& config, RngStream& rng) {
    std::vector<double> x0(config.plant.n);
    for (std::size_t j = 0; j < x0.size(); ++j) {
        x0[j] = rng.next_gaussian(std::sqrt(config.prior_var[j]));
    }
    return x0;
}

void estimation_trial(const SimConfig& config, const Schedule& schedule, std::uint64_t trial,
                      BlockAccum& acc) {
    RngStream rng(config.master_seed, trial);
    const std::vector<double> x0 = draw_initial_state(config, rng);
    std::vector<ScalarCodecState> coords;
    coords.reserve(config.plant.n);
    for (double pv : config.prior_var) coords.push_back(make_scalar_codec(pv));
    std::size_t cursor = 0;
    StepSnapshot snap;
    for (std::size_t t = 0; t < config.horizon; ++t) {
        codec_step(config, schedule, coords, cursor, x0, rng, t, acc, snap);
    }
}

void closed_loop_trial(const SimConfig& config, const Schedule& schedule,
                       const std::vector<double>& gain, std::uint64_t trial, BlockAccum& acc) {
    RngStream rng(config.master_seed, trial);
    const std::vector<double> x0 = draw_initial_state(config, rng);
    std::vector<ScalarCodecState> coords;
    coords.reserve(config.plant.n);
    for (double pv : config.prior_var) coords.push_back(make_scalar_codec(pv));
    std::size_t cursor = 0;

    std::vector<double> x = x0;
    std::vector<double> xhat(config.plant.n, 0.0);
    ControllerState ctrl = make_controller(config.plant, gain, config.overflow_cap);
    StepSnapshot snap;

    for (std::size_t t = 0; t < config.horizon; ++t) {
        double sq = 0.0;
        bool blown = false;
        for (double xi : x) {
            if (!std::isfinite(xi) || std::abs(xi) > config.overflow_cap) blown = true;
            sq += xi * xi;
        }
        if (blown) {
            fill_diverged(acc, t, config.horizon, config.overflow_cap, snap);
            acc.diverged += 1;
            return;
        }
        acc.step(t)[kSqState] += sq;

        codec_step(config, schedule, coords, cursor, x0, rng, t, acc, snap);

        for (std::size_t j = 0; j < coords.size(); ++j) xhat[j] = coords[j].estimate;
        double u = 0.0;
        try {
            u = control_input(ctrl, config.plant, xhat);
        } catch (const std::overflow_error&) {
            fill_diverged(acc, t + 1, config.horizon, config.overflow_cap, snap);
            acc.diverged += 1;
            return;
        }
        plant_advance(config.plant, x, u);
    }
}

// Fade-averaged error-variance recursion walked through the same schedule the
// trials use. A coordinate sits at its prior until its first slot, picks up
// the step-0 expectation there, and contracts by rho on each later slot.
std::vector<double> expected_error_series(const SimConfig& config, const Schedule& schedule) {
    const double rho = expected_contraction_limit(config.channel);
    double mean_gain_dev_sq = 0.0;  // E{(g-1)^2}
    for (const auto& atom : config.channel.fading.atoms()) {
        mean_gain_dev_sq += atom.probability * (atom.gain - 1.0) * (atom.gain - 1.0);
    }

    std::vector<double> per_coord = config.prior_var;
    std::vector<bool> used(config.plant.n, false);
    std::vector<double> series(config.horizon, 0.0);
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < config.horizon; ++t) {
        const int owner = schedule.slot_owner[cursor];
        cursor = (cursor + 1) % schedule.period;
        if (!used[owner]) {
            per_coord[owner] = mean_gain_dev_sq * config.prior_var[owner] +
                               config.prior_var[owner] * config.channel.noise_var /
                                   config.channel.power;
            used[owner] = true;
        } else {
            per_coord[owner] *= rho;
        }
        double total = 0.0;
        for (double v : per_coord) total += v;
        series[t] = total;
    }
    return series;
}

template <typename TrialFn>
EnsembleStats reduce_trials(const SimConfig& config, Execution exec, TrialFn&& run_one) {
    const std::size_t horizon = config.horizon;
    const std::uint64_t trials = config.trials;
    const std::uint64_t nblocks = (trials + kTrialBlock - 1) / kTrialBlock;

    std::vector<BlockAccum> partial(nblocks, BlockAccum(horizon));
    const bool parallel = exec == Execution::Parallel;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
        const std::uint64_t begin = static_cast<std::uint64_t>(b) * kTrialBlock;
        const std::uint64_t end = std::min(trials, begin + kTrialBlock);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            run_one(trial, partial[b]);
        }
    }
#ifndef _OPENMP
    (void)parallel;
#endif

    BlockAccum total(horizon);
    for (const BlockAccum& block : partial) {
        total.add(block);
    }

    EnsembleStats stats;
    const double inv_n = 1.0 / static_cast<double>(trials);
    auto scaled = [&](Field field) {
        std::vector<double> out(horizon);
        for (std::size_t t = 0; t < horizon; ++t) out[t] = total.data[t * kFieldCount + field] * inv_n;
        return out;
    };
    stats.mean_sq_state = scaled(kSqState);
    stats.mean_sq_error = scaled(kSqErr);
    stats.mean_error = scaled(kErr);
    stats.mean_sq_error_sq = scaled(kSqErrSq);
    stats.mean_tracked_var = scaled(kVar);
    stats.mean_tracked_var_sq = scaled(kVarSq);
    stats.power_usage = scaled(kPow2);
    stats.power_usage_sq = scaled(kPow4);
    stats.trials = trials;
    stats.diverged_count = total.diverged;
    return stats;
}

Verdict verdict_from_slope(double slope, bool defined, double diverged_fraction) {
    if (diverged_fraction > 0.01) return Verdict::Unstable;
    if (!defined) return Verdict::Stable;  // trajectory collapsed to exact zero
    if (slope < -0.01) return Verdict::Stable;
    if (slope > 0.01) return Verdict::Unstable;
    return Verdict::Inconclusive;
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Unstable: return "Unstable";
        default: return "Inconclusive";
    }
}

EnsembleStats run_estimation(const SimConfig& config, Execution exec) {
    validate_config(config);
    const Schedule schedule = effective_schedule(config);

    EnsembleStats stats = reduce_trials(config, exec, [&](std::uint64_t trial, BlockAccum& acc) {
        estimation_trial(config, schedule, trial, acc);
    });
    stats.expected_error_var = expected_error_series(config, schedule);

    // No plant here; the verdict tracks whether the estimation error decays.
    if (config.horizon >= 20) {
        bool defined = false;
        stats.tail_slope = tail_log_slope(stats.mean_sq_error, 0.5, defined);
        stats.tail_slope_defined = defined;
        stats.verdict = verdict_from_slope(stats.tail_slope, defined, 0.0);
    }
    return stats;
}

EnsembleStats run_closed_loop(const SimConfig& config, Execution exec) {
    validate_config(config);
    const Schedule schedule = effective_schedule(config);
    const std::vector<double> gain = deadbeat_gain(config.plant);  // throws before any trial

    EnsembleStats stats = reduce_trials(config, exec, [&](std::uint64_t trial, BlockAccum& acc) {
        closed_loop_trial(config, schedule, gain, trial, acc);
    });
    stats.expected_error_var = expected_error_series(config, schedule);

    if (config.horizon >= 20) {
        stats.verdict = classify_stability(stats, 0.5);
        bool defined = false;
        stats.tail_slope = tail_log_slope(stats.mean_sq_state, 0.5, defined);
        stats.tail_slope_defined = defined;
    }
    return stats;
}

double tail_log_slope(const std::vector<double>& series, double tail_fraction, bool& defined) {
    const std::size_t horizon = series.size();
    std::size_t len = static_cast<std::size_t>(
        std::llround(tail_fraction * static_cast<double>(horizon)));
    len = std::clamp<std::size_t>(len, 2, horizon);
    const std::size_t start = horizon - len;

    double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
    std::size_t count = 0;
    for (std::size_t t = start; t < horizon; ++t) {
        if (!(series[t] > 0.0)) continue;  // zeros carry no log information
        const double y = std::log(series[t]);
        const double td = static_cast<double>(t);
        sum_t += td;
        sum_y += y;
        sum_tt += td * td;
        sum_ty += td * y;
        ++count;
    }
    if (count < 2) {
        defined = false;
        return 0.0;
    }
    const double dn = static_cast<double>(count);
    const double denom = sum_tt - sum_t * sum_t / dn;
    if (denom <= 0.0) {
        defined = false;
        return 0.0;
    }
    defined = true;
    return (sum_ty - sum_t * sum_y / dn) / denom;
}

Verdict classify_stability(const EnsembleStats& stats, double tail_fraction) {
    if (stats.mean_sq_state.size() < 20) {
        throw std::invalid_argument("stability verdict needs a horizon of at least 20 steps");
    }
    if (stats.trials == 0) {
        throw std::invalid_argument("no trials");
    }
    const double diverged_fraction =
        static_cast<double>(stats.diverged_count) / static_cast<double>(stats.trials);
    bool defined = false;
    const double slope = tail_log_slope(stats.mean_sq_state, tail_fraction, defined);
    return verdict_from_slope(slope, defined, diverged_fraction);
}

std::vector<SweepRow> sweep_capacity(const std::vector<double>& eps_grid, double power,
                                     double noise_var) {
    std::vector<SweepRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        const ChannelParams params(power, noise_var, FadingDistribution::bernoulli(eps));
        const CapacityReport report = capacity_report(params);
        rows.push_back({eps, report.shannon_bits, report.msc_bits, report.msl_bits});
    }
    return rows;
}

const char* region_label_name(RegionLabel label) {
    switch (label) {
        case RegionLabel::Sufficient: return "SUFFICIENT";
        case RegionLabel::Gap: return "GAP";
        default: return "EXCLUDED";
    }
}

RegionPoint classify_region_point(double log_l1, double log_l2, const ChannelParams& params) {
    const SpectrumSpec spec({{log_l1, 1, 1}, {log_l2, 1, 1}});
    RegionPoint point{};
    if (vector_sufficient(spec, params)) {
        point.label = RegionLabel::Sufficient;
    } else if (vector_necessary(spec, params)) {
        point.label = RegionLabel::Gap;
    } else {
        point.label = RegionLabel::Excluded;
    }
    point.linear_ok = (log_l1 + log_l2) < linear_ms_capacity_bits(params);
    return point;
}

std::vector<RegionRow> region_grid(double eps, double power, double noise_var, double grid_max,
                                   std::size_t steps) {
    if (steps < 2) {
        throw std::invalid_argument("region grid needs at least 2 steps per axis");
    }
    if (!(grid_max > 0.0)) {
        throw std::invalid_argument("grid max must be positive");
    }
    const ChannelParams params(power, noise_var, FadingDistribution::bernoulli(eps));
    std::vector<RegionRow> rows(steps * steps);
    const double scale = grid_max / static_cast<double>(steps - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(steps); ++i) {
        const double l1 = static_cast<double>(i) * scale;
        for (std::size_t j = 0; j < steps; ++j) {
            const double l2 = static_cast<double>(j) * scale;
            const RegionPoint point = classify_region_point(l1, l2, params);
            rows[static_cast<std::size_t>(i) * steps + j] = {l1, l2, point.label, point.linear_ok};
        }
    }
    return rows;
}

}  // namespace mscap
