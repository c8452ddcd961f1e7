// Times the serial reference kernels against their OpenMP variants and
// prints a CSV table. The OpenMP kernels split work by output row only, so
// both variants must produce bitwise-identical results; this harness also
// asserts that while it measures.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "dyngraph/kernels.hpp"

namespace {

using Clock = std::chrono::steady_clock;
namespace k = dyngraph::kernels;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_buffer(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a == b;
}

template <typename SerialFn, typename OmpFn>
void report(const char* name, std::size_t n, int repeats, SerialFn serial_fn, OmpFn omp_fn,
            const std::vector<double>& serial_out, const std::vector<double>& omp_out) {
    // Warm up once, then take the best of `repeats`.
    double t_serial = 1e300, t_omp = 1e300;
    serial_fn();
    for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        serial_fn();
        t_serial = std::min(t_serial, seconds_since(t0));
    }
    omp_fn();
    for (int r = 0; r < repeats; ++r) {
        auto t0 = Clock::now();
        omp_fn();
        t_omp = std::min(t_omp, seconds_since(t0));
    }
    const bool same = bitwise_equal(serial_out, omp_out);
    std::printf("%s,%zu,%d,%.3e,%.3e,%.2f,%s\n", name, n, omp_get_max_threads(), t_serial, t_omp,
                t_serial / t_omp, same ? "yes" : "NO");
    if (!same) {
        std::fprintf(stderr, "kernel %s: serial and OpenMP outputs differ\n", name);
        std::exit(1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> sizes{256, 512, 1024};
    int repeats = 5;
    if (argc > 1) {
        sizes.clear();
        for (int i = 1; i < argc; ++i) sizes.push_back(std::strtoull(argv[i], nullptr, 10));
    }

    std::printf("kernel,n,threads,serial_s,omp_s,speedup,bitwise_match\n");
    std::mt19937_64 rng(42);
    for (std::size_t n : sizes) {
        const auto a = random_buffer(n * n, rng);
        const auto b = random_buffer(n * n, rng);
        const auto x = random_buffer(n, rng);
        const auto u = random_buffer(n, rng);
        std::vector<double> y1(n), y2(n);
        std::vector<double> c1(n * n), c2(n * n);

        report(
            "matvec", n, repeats, [&] { k::serial::matvec(n, n, a.data(), x.data(), y1.data()); },
            [&] { k::omp::matvec(n, n, a.data(), x.data(), y2.data()); }, y1, y2);
        report(
            "matvec_t", n, repeats,
            [&] { k::serial::matvec_t(n, n, a.data(), x.data(), y1.data()); },
            [&] { k::omp::matvec_t(n, n, a.data(), x.data(), y2.data()); }, y1, y2);
        c1 = a;
        c2 = a;
        report(
            "ger", n, repeats, [&] { k::serial::ger(n, n, 1.0, u.data(), x.data(), c1.data()); },
            [&] { k::omp::ger(n, n, 1.0, u.data(), x.data(), c2.data()); }, c1, c2);
        if (n <= 1024) {
            report(
                "gemm", n, std::max(1, repeats / 2),
                [&] { k::serial::gemm(n, n, n, a.data(), b.data(), c1.data()); },
                [&] { k::omp::gemm(n, n, n, a.data(), b.data(), c2.data()); }, c1, c2);
        }
    }
    return 0;
}
