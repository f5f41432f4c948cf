#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mscap/capacity.hpp"
#include "mscap/channel.hpp"
#include "mscap/sim.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;

// All CSV numerics go through this: 9 significant digits, stable across runs.
std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

json make_manifest(const std::string& command, json parameters, std::optional<std::uint64_t> seed) {
    json manifest;
    manifest["command"] = command;
    manifest["parameters"] = std::move(parameters);
    if (seed.has_value()) {
        manifest["master_seed"] = *seed;
    } else {
        manifest["master_seed"] = nullptr;
    }
    manifest["tool_version"] = kToolVersion;
    manifest["timestamp"] = iso_timestamp();
    return manifest;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, sep)) parts.push_back(token);
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + ": '" + text + "'");
    }
}

mscap::FadingDistribution parse_dist(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("distribution must look like bernoulli:<eps>, point:<g> or atoms:<g:p,...>");
    }
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (kind == "bernoulli") {
        return mscap::FadingDistribution::bernoulli(parse_double(rest, "bernoulli epsilon"));
    }
    if (kind == "point") {
        return mscap::FadingDistribution::point_mass(parse_double(rest, "point gain"));
    }
    if (kind == "atoms") {
        std::vector<mscap::FadingDistribution::Atom> atoms;
        for (const std::string& pair : split(rest, ',')) {
            const auto sep = pair.find(':');
            if (sep == std::string::npos) {
                throw std::invalid_argument("atom must look like <gain>:<prob>, got '" + pair + "'");
            }
            atoms.push_back({parse_double(pair.substr(0, sep), "atom gain"),
                             parse_double(pair.substr(sep + 1), "atom probability")});
        }
        return mscap::FadingDistribution(std::move(atoms));
    }
    throw std::invalid_argument("unknown distribution kind '" + kind + "'");
}

std::vector<double> parse_grid(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) {
        throw std::invalid_argument("grid must look like start:stop:step");
    }
    const double start = parse_double(parts[0], "grid start");
    const double stop = parse_double(parts[1], "grid stop");
    const double step = parse_double(parts[2], "grid step");
    if (!(step > 0.0)) {
        throw std::invalid_argument("grid step must be > 0");
    }
    std::vector<double> values;
    for (int i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > stop + 1e-12) break;
        values.push_back(std::min(v, stop));
    }
    if (values.empty()) {
        throw std::invalid_argument("grid is empty");
    }
    return values;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot open output file '" + path + "'");
    }
    out << content;
}

void emit_with_manifest(const std::string& csv, const json& manifest, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << csv;
        return;
    }
    write_file(out_path, csv);
    write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

// --- capacity ---------------------------------------------------------

int cmd_capacity(const std::string& dist_spec, double power, double noise,
                 const std::string& format, const std::string& out_path) {
    if (!(noise > 0.0)) {
        throw std::invalid_argument("--noise must be > 0 for capacity evaluation");
    }
    const mscap::ChannelParams params(power, noise, parse_dist(dist_spec));
    const mscap::CapacityReport report = mscap::capacity_report(params);

    json parameters = {{"dist", dist_spec}, {"power", power}, {"noise", noise}, {"format", format}};
    const json manifest = make_manifest("capacity", parameters, std::nullopt);

    if (format == "csv") {
        std::string csv = "shannon_bits,msc_bits,msl_bits,contraction\n";
        csv += fmt9(report.shannon_bits) + "," + fmt9(report.msc_bits) + "," +
               fmt9(report.msl_bits) + "," + fmt9(report.contraction) + "\n";
        emit_with_manifest(csv, manifest, out_path);
        return 0;
    }
    if (format != "json") {
        throw std::invalid_argument("--format must be json or csv");
    }
    json doc;
    doc["shannon_bits"] = report.shannon_bits;
    doc["msc_bits"] = report.msc_bits;
    doc["msl_bits"] = report.msl_bits;
    doc["contraction"] = report.contraction;
    doc["manifest"] = manifest;
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    return 0;
}

// --- sweep ------------------------------------------------------------

int cmd_sweep(const std::string& grid_spec, double power, double noise, const std::string& out_path) {
    if (!(noise > 0.0)) {
        throw std::invalid_argument("--noise must be > 0 for capacity evaluation");
    }
    const std::vector<double> grid = parse_grid(grid_spec);
    for (double eps : grid) {
        if (eps < 0.0 || eps > 1.0) {
            throw std::invalid_argument("erasure probabilities must stay in [0,1]");
        }
    }
    const auto rows = mscap::sweep_capacity(grid, power, noise);

    std::string csv = "epsilon,shannon_bits,msc_bits,msl_bits\n";
    for (const auto& row : rows) {
        csv += fmt9(row.epsilon) + "," + fmt9(row.shannon_bits) + "," + fmt9(row.msc_bits) + "," +
               fmt9(row.msl_bits) + "\n";
    }
    json parameters = {{"eps_grid", grid_spec}, {"power", power}, {"noise", noise}};
    emit_with_manifest(csv, make_manifest("sweep", parameters, std::nullopt), out_path);
    return 0;
}

// --- region -----------------------------------------------------------

int cmd_region(double eps, double power, double noise, double grid_max, std::size_t steps,
               const std::string& out_path) {
    if (!(noise > 0.0)) {
        throw std::invalid_argument("--noise must be > 0 for capacity evaluation");
    }
    if (eps < 0.0 || eps > 1.0) {
        throw std::invalid_argument("--eps must stay in [0,1]");
    }
    if (steps < 2) {
        throw std::invalid_argument("--steps must be at least 2");
    }
    const auto rows = mscap::region_grid(eps, power, noise, grid_max, steps);

    std::string csv = "log_l1,log_l2,label,linear_ok\n";
    for (const auto& row : rows) {
        csv += fmt9(row.log_l1) + "," + fmt9(row.log_l2) + "," +
               std::string(mscap::region_label_name(row.label)) + "," +
               (row.linear_ok ? "true" : "false") + "\n";
    }
    json parameters = {
        {"eps", eps}, {"power", power}, {"noise", noise}, {"grid_max", grid_max}, {"steps", steps}};
    emit_with_manifest(csv, make_manifest("region", parameters, std::nullopt), out_path);
    return 0;
}

// --- simulate ---------------------------------------------------------

struct PlantArgs {
    mscap::PlantSpec plant;
    std::vector<double> eigenvalues;
};

PlantArgs parse_plant(const std::string& spec, const std::string& b_spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("plant must look like scalar:<lambda> or diag:<l1,l2,...>");
    }
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);

    std::vector<double> eigs;
    if (kind == "scalar") {
        eigs.push_back(parse_double(rest, "plant eigenvalue"));
    } else if (kind == "diag") {
        for (const std::string& item : split(rest, ',')) {
            eigs.push_back(parse_double(item, "plant eigenvalue"));
        }
    } else {
        throw std::invalid_argument("unknown plant kind '" + kind + "'");
    }

    std::vector<double> b(eigs.size(), 1.0);
    if (!b_spec.empty()) {
        const auto items = split(b_spec, ',');
        if (items.size() != eigs.size()) {
            throw std::invalid_argument("--b length must match the plant dimension");
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            b[i] = parse_double(items[i], "input vector entry");
        }
    }
    return {mscap::PlantSpec::diagonal(eigs, b), eigs};
}

std::size_t parse_schedule_tau(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos || spec.substr(0, colon) != "tau") {
        throw std::invalid_argument("schedule must look like tau:<period>");
    }
    const double tau = parse_double(spec.substr(colon + 1), "schedule period");
    if (tau < 1.0 || tau != std::floor(tau)) {
        throw std::invalid_argument("schedule period must be a positive integer");
    }
    return static_cast<std::size_t>(tau);
}

int cmd_simulate(const std::string& plant_spec, const std::string& b_spec,
                 const std::string& dist_spec, double power, double noise, std::uint64_t trials,
                 std::size_t horizon, std::uint64_t seed, const std::string& mode,
                 const std::string& schedule_spec, const std::string& out_path) {
    if (mode != "estimation" && mode != "closed-loop") {
        throw std::invalid_argument("--mode must be estimation or closed-loop");
    }
    if (trials < 1) throw std::invalid_argument("--trials must be >= 1");
    if (horizon < 20) throw std::invalid_argument("--horizon must be >= 20 for a verdict");
    if (!(power > 0.0)) throw std::invalid_argument("--power must be > 0");
    if (noise < 0.0) throw std::invalid_argument("--noise must be >= 0");

    PlantArgs plant_args = parse_plant(plant_spec, b_spec);
    const std::size_t n = plant_args.plant.n;

    mscap::SimConfig config{
        std::move(plant_args.plant),
        mscap::ChannelParams(power, noise, parse_dist(dist_spec)),
        std::vector<double>(n, 1.0),
        trials,
        horizon,
        seed,
        std::nullopt,
        1e150,
    };

    if (n > 1) {
        if (schedule_spec.empty()) {
            throw std::invalid_argument("vector plants need --schedule tau:<period>");
        }
        const std::size_t tau = parse_schedule_tau(schedule_spec);
        // Resource shares proportional to the instability of each mode.
        double total_log = 0.0;
        std::vector<double> alphas(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            alphas[i] = std::log2(std::abs(plant_args.eigenvalues[i]));
            total_log += alphas[i];
        }
        if (!(total_log > 0.0)) {
            throw std::invalid_argument("cannot derive shares: every |eigenvalue| is 1");
        }
        for (double& a : alphas) a /= total_log;
        config.schedule = mscap::make_schedule(alphas, tau);
    } else if (!schedule_spec.empty()) {
        throw std::invalid_argument("--schedule only applies to vector plants");
    }

    const mscap::EnsembleStats stats = mode == "estimation" ? mscap::run_estimation(config)
                                                            : mscap::run_closed_loop(config);

    json parameters = {{"plant", plant_spec}, {"b", b_spec},    {"dist", dist_spec},
                       {"power", power},      {"noise", noise}, {"trials", trials},
                       {"horizon", horizon},  {"mode", mode},   {"schedule", schedule_spec},
                       {"out", out_path}};
    const json manifest = make_manifest("simulate", parameters, seed);

    if (!out_path.empty()) {
        std::string csv = "t,mean_sq_state,mean_sq_error,mean_tracked_var,mean_power\n";
        for (std::size_t t = 0; t < horizon; ++t) {
            csv += std::to_string(t) + "," + fmt9(stats.mean_sq_state[t]) + "," +
                   fmt9(stats.mean_sq_error[t]) + "," + fmt9(stats.mean_tracked_var[t]) + "," +
                   fmt9(stats.power_usage[t]) + "\n";
        }
        emit_with_manifest(csv, manifest, out_path);
    }

    json doc;
    doc["verdict"] = mscap::verdict_name(stats.verdict);
    if (stats.tail_slope_defined) {
        doc["tail_slope"] = stats.tail_slope;
    } else {
        doc["tail_slope"] = nullptr;
    }
    doc["diverged_count"] = stats.diverged_count;
    doc["trials"] = stats.trials;
    doc["horizon"] = horizon;
    doc["mode"] = mode;
    doc["manifest"] = manifest;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity and mean-square stabilization toolkit for power-constrained fading channels"};
    app.require_subcommand(1);

    std::string dist_spec;
    std::string format = "json";
    std::string out_path;
    double power = 1.0;
    double noise = 1.0;

    auto* capacity = app.add_subcommand("capacity", "evaluate the three channel capacities");
    capacity->add_option("--dist", dist_spec, "bernoulli:<eps> | point:<g> | atoms:<g:p,...>")->required();
    capacity->add_option("--power", power, "transmit power budget P");
    capacity->add_option("--noise", noise, "additive noise variance");
    capacity->add_option("--format", format, "json or csv");
    capacity->add_option("--out", out_path, "write output to this file");

    std::string grid_spec;
    auto* sweep = app.add_subcommand("sweep", "capacity table over a Bernoulli erasure grid");
    sweep->add_option("--eps-grid", grid_spec, "start:stop:step")->required();
    sweep->add_option("--power", power, "transmit power budget P");
    sweep->add_option("--noise", noise, "additive noise variance");
    sweep->add_option("--out", out_path, "write CSV to this file");

    double eps = 0.8;
    double grid_max = 0.3;
    std::size_t steps = 200;
    auto* region = app.add_subcommand("region", "stabilizability region over (log|l1|, log|l2|)");
    region->add_option("--eps", eps, "Bernoulli erasure probability")->required();
    region->add_option("--power", power, "transmit power budget P");
    region->add_option("--noise", noise, "additive noise variance");
    region->add_option("--grid-max", grid_max, "axis upper bound (bits)");
    region->add_option("--steps", steps, "grid points per axis");
    region->add_option("--out", out_path, "write CSV to this file");

    std::string plant_spec;
    std::string b_spec;
    std::string mode = "closed-loop";
    std::string schedule_spec;
    std::uint64_t trials = 10000;
    std::size_t horizon = 200;
    std::uint64_t seed = 42;
    auto* simulate = app.add_subcommand("simulate", "seeded Monte Carlo estimation / closed-loop run");
    simulate->add_option("--plant", plant_spec, "scalar:<lambda> | diag:<l1,l2,...>")->required();
    simulate->add_option("--b", b_spec, "input vector, comma separated (default all ones)");
    simulate->add_option("--dist", dist_spec, "fading law")->required();
    simulate->add_option("--power", power, "transmit power budget P");
    simulate->add_option("--noise", noise, "additive noise variance");
    simulate->add_option("--trials", trials, "Monte Carlo trials");
    simulate->add_option("--horizon", horizon, "steps per trial (>= 20)");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--mode", mode, "estimation or closed-loop");
    simulate->add_option("--schedule", schedule_spec, "tau:<period> (vector plants)");
    simulate->add_option("--out", out_path, "write per-step ensemble CSV to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (capacity->parsed()) return cmd_capacity(dist_spec, power, noise, format, out_path);
        if (sweep->parsed()) return cmd_sweep(grid_spec, power, noise, out_path);
        if (region->parsed()) return cmd_region(eps, power, noise, grid_max, steps, out_path);
        if (simulate->parsed()) {
            return cmd_simulate(plant_spec, b_spec, dist_spec, power, noise, trials, horizon, seed,
                                mode, schedule_spec, out_path);
        }
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
