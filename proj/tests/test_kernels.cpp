#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "dyngraph/kernels.hpp"

namespace k = dyngraph::kernels;

namespace {

std::vector<double> random_buffer(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("matvec matches a hand-computed product") {
    // [[1,2],[3,4],[5,6]] * (1,-1) = (-1,-1,-1)
    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> x{1, -1};
    std::vector<double> y(3);
    k::serial::matvec(3, 2, a.data(), x.data(), y.data());
    CHECK(y == std::vector<double>{-1, -1, -1});

    std::vector<double> yt(2);
    k::serial::matvec_t(3, 2, a.data(), std::vector<double>{1, 1, 1}.data(), yt.data());
    CHECK(yt == std::vector<double>{9, 12});
}

TEST_CASE("gemm matches a hand-computed product") {
    const std::vector<double> a{1, 2, 3, 4};        // 2x2
    const std::vector<double> b{5, 6, 7, 8};        // 2x2
    std::vector<double> c(4);
    k::serial::gemm(2, 2, 2, a.data(), b.data(), c.data());
    CHECK(c == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("OpenMP variants are bitwise identical to the serial reference") {
    std::mt19937_64 rng(7);
    for (std::size_t n : {1u, 3u, 17u, 64u, 129u}) {
        const auto a = random_buffer(n * n, rng);
        const auto b = random_buffer(n * n, rng);
        const auto x = random_buffer(n, rng);
        const auto u = random_buffer(n, rng);

        std::vector<double> y1(n), y2(n);
        k::serial::matvec(n, n, a.data(), x.data(), y1.data());
        k::omp::matvec(n, n, a.data(), x.data(), y2.data());
        CHECK(y1 == y2);

        k::serial::matvec_t(n, n, a.data(), x.data(), y1.data());
        k::omp::matvec_t(n, n, a.data(), x.data(), y2.data());
        CHECK(y1 == y2);

        auto c1 = a, c2 = a;
        k::serial::ger(n, n, 0.5, u.data(), x.data(), c1.data());
        k::omp::ger(n, n, 0.5, u.data(), x.data(), c2.data());
        CHECK(c1 == c2);

        std::vector<double> g1(n * n), g2(n * n);
        k::serial::gemm(n, n, n, a.data(), b.data(), g1.data());
        k::omp::gemm(n, n, n, a.data(), b.data(), g2.data());
        CHECK(g1 == g2);

        std::vector<double> t1(n * n), t2(n * n);
        k::serial::transpose(n, n, a.data(), t1.data());
        k::omp::transpose(n, n, a.data(), t2.data());
        CHECK(t1 == t2);
    }
}

TEST_CASE("mode dispatch produces identical results in every mode") {
    std::mt19937_64 rng(11);
    const std::size_t n = 200;  // above the auto-parallel grain
    const auto a = random_buffer(n * n, rng);
    const auto x = random_buffer(n, rng);
    std::vector<double> serial(n), parallel(n), automatic(n);

    k::set_mode(k::Mode::Serial);
    k::matvec(n, n, a.data(), x.data(), serial.data());
    k::set_mode(k::Mode::OpenMP);
    k::matvec(n, n, a.data(), x.data(), parallel.data());
    k::set_mode(k::Mode::Auto);
    k::matvec(n, n, a.data(), x.data(), automatic.data());
    k::set_mode(k::Mode::Auto);

    CHECK(serial == parallel);
    CHECK(serial == automatic);
}

TEST_CASE("flop and gemm counters track issued work") {
    k::reset_counters();
    std::vector<double> a(16, 1.0), b(16, 1.0), c(16);
    k::gemm(4, 4, 4, a.data(), b.data(), c.data());
    CHECK(k::gemm_calls() == 1);
    CHECK(k::flop_count() == 2 * 4 * 4 * 4);

    k::reset_counters();
    std::vector<double> x(8, 1.0), y(8);
    k::matvec(2, 4, a.data(), x.data(), y.data());
    CHECK(k::gemm_calls() == 0);
    CHECK(k::flop_count() == 2 * 2 * 4);
}
