#include "dyngraph/kernels.hpp"

#include <atomic>
#include <cmath>

namespace dyngraph::kernels {

namespace {

std::atomic<Mode> g_mode{Mode::Auto};
std::atomic<std::uint64_t> g_flops{0};
std::atomic<std::uint64_t> g_gemm_calls{0};

inline bool run_parallel(std::size_t work) {
    switch (g_mode.load(std::memory_order_relaxed)) {
        case Mode::Serial:
            return false;
        case Mode::OpenMP:
            return true;
        case Mode::Auto:
            return work >= kAutoParallelGrain;
    }
    return false;
}

inline void count(std::uint64_t n) {
    g_flops.fetch_add(n, std::memory_order_relaxed);
}

}  // namespace

void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }
Mode mode() { return g_mode.load(std::memory_order_relaxed); }

void reset_counters() {
    g_flops.store(0, std::memory_order_relaxed);
    g_gemm_calls.store(0, std::memory_order_relaxed);
}
std::uint64_t flop_count() { return g_flops.load(std::memory_order_relaxed); }
std::uint64_t gemm_calls() { return g_gemm_calls.load(std::memory_order_relaxed); }
void add_flops(std::uint64_t n) { count(n); }

namespace serial {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double nrm2(const double* x, std::size_t n) { return std::sqrt(dot(x, x, n)); }

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(std::size_t n, double alpha, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = a + i * cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < cols; ++j) y[j] += xi * row[j];
    }
}

void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* row = a + i * cols;
        const double ui = alpha * u[i];
        for (std::size_t j = 0; j < cols; ++j) row[j] += ui * v[j];
    }
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void transpose(std::size_t rows, std::size_t cols, const double* a, double* at) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
}

}  // namespace serial

namespace omp {

void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        const double* row = a + static_cast<std::size_t>(i) * cols;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
    // Column blocks per thread: each y[j] is owned by exactly one thread,
    // summed in row order exactly as the serial kernel does.
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(cols); ++j) y[j] = 0.0;
#pragma omp for schedule(static)
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(cols); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows; ++i) s += x[i] * a[i * cols + j];
            y[j] = s;
        }
    }
}

void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i) {
        double* row = a + static_cast<std::size_t>(i) * cols;
        const double ui = alpha * u[i];
        for (std::size_t j = 0; j < cols; ++j) row[j] += ui * v[j];
    }
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        const double* arow = a + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void transpose(std::size_t rows, std::size_t cols, const double* a, double* at) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(rows); ++i)
        for (std::size_t j = 0; j < cols; ++j)
            at[j * rows + static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i) * cols + j];
}

}  // namespace omp

double dot(const double* x, const double* y, std::size_t n) {
    count(2 * n);
    return serial::dot(x, y, n);
}

double nrm2(const double* x, std::size_t n) {
    count(2 * n);
    return serial::nrm2(x, n);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    count(2 * n);
    serial::axpy(n, alpha, x, y);
}

void scal(std::size_t n, double alpha, double* x) {
    count(n);
    serial::scal(n, alpha, x);
}

void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
    count(2 * rows * cols);
    if (run_parallel(rows * cols))
        omp::matvec(rows, cols, a, x, y);
    else
        serial::matvec(rows, cols, a, x, y);
}

void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y) {
    count(2 * rows * cols);
    if (run_parallel(rows * cols))
        omp::matvec_t(rows, cols, a, x, y);
    else
        serial::matvec_t(rows, cols, a, x, y);
}

void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a) {
    count(3 * rows * cols);
    if (run_parallel(rows * cols))
        omp::ger(rows, cols, alpha, u, v, a);
    else
        serial::ger(rows, cols, alpha, u, v, a);
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c) {
    count(2 * m * k * n);
    g_gemm_calls.fetch_add(1, std::memory_order_relaxed);
    if (run_parallel(m * n))
        omp::gemm(m, k, n, a, b, c);
    else
        serial::gemm(m, k, n, a, b, c);
}

void transpose(std::size_t rows, std::size_t cols, const double* a, double* at) {
    if (run_parallel(rows * cols))
        omp::transpose(rows, cols, a, at);
    else
        serial::transpose(rows, cols, a, at);
}

}  // namespace dyngraph::kernels
