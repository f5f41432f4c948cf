// Times the Monte Carlo harness with the serial reference kernel against the
// OpenMP one on the same workload and checks the results agree bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#include "mscap/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t trials = 40000;
    std::size_t horizon = 200;
    if (argc > 1) trials = std::stoull(argv[1]);
    if (argc > 2) horizon = std::stoul(argv[2]);

    mscap::SimConfig config{
        mscap::PlantSpec::scalar(1.1),
        mscap::ChannelParams(1.0, 1.0, mscap::FadingDistribution::bernoulli(0.5)),
        {1.0},
        trials,
        horizon,
        2024,
        std::nullopt,
        1e150,
    };

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    std::printf("workload: closed loop, %llu trials x %zu steps\n",
                static_cast<unsigned long long>(trials), horizon);

    auto t0 = std::chrono::steady_clock::now();
    const mscap::EnsembleStats serial = mscap::run_closed_loop(config, mscap::Execution::Serial);
    const double serial_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const mscap::EnsembleStats parallel = mscap::run_closed_loop(config, mscap::Execution::Parallel);
    const double parallel_s = seconds_since(t0);

    std::printf("serial   : %8.3f s\n", serial_s);
    std::printf("parallel : %8.3f s\n", parallel_s);
    std::printf("speedup  : %8.2fx\n", serial_s / parallel_s);

    const bool same = bitwise_equal(serial.mean_sq_state, parallel.mean_sq_state) &&
                      bitwise_equal(serial.mean_sq_error, parallel.mean_sq_error) &&
                      bitwise_equal(serial.power_usage, parallel.power_usage) &&
                      serial.diverged_count == parallel.diverged_count;
    std::printf("bitwise  : %s\n", same ? "identical" : "MISMATCH");
    return same ? 0 : 1;
}
