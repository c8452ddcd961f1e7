#pragma once

#include <cstddef>
#include <cstdint>

// Dense kernels used by every engine. Each kernel has a serial reference
// implementation and an OpenMP variant; the unprefixed entry points dispatch
// on the active Mode. Parallel variants split work by output row only, so
// no floating-point reduction order changes between modes: for the same
// inputs, serial and OpenMP results are bitwise identical. Reductions
// (dot, nrm2) are always serial.
//
// All kernels bump a global flop counter; gemm additionally bumps a
// matrix-matrix counter so tests can assert an update path never issued one.

namespace dyngraph::kernels {

enum class Mode { Serial, OpenMP, Auto };

void set_mode(Mode m);
Mode mode();

// Auto mode runs the OpenMP variant when rows * cols >= this.
inline constexpr std::size_t kAutoParallelGrain = 16384;

void reset_counters();
std::uint64_t flop_count();
std::uint64_t gemm_calls();
void add_flops(std::uint64_t n);

namespace serial {
double dot(const double* x, const double* y, std::size_t n);
double nrm2(const double* x, std::size_t n);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scal(std::size_t n, double alpha, double* x);
void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a);
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c);
void transpose(std::size_t rows, std::size_t cols, const double* a, double* at);
}  // namespace serial

namespace omp {
void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a);
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c);
void transpose(std::size_t rows, std::size_t cols, const double* a, double* at);
}  // namespace omp

// Dispatching entry points.
double dot(const double* x, const double* y, std::size_t n);
double nrm2(const double* x, std::size_t n);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void scal(std::size_t n, double alpha, double* x);

// y = A * x, A row-major rows x cols.
void matvec(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
// y = A^T * x, y has length cols.
void matvec_t(std::size_t rows, std::size_t cols, const double* a, const double* x, double* y);
// A += alpha * u * v^T.
void ger(std::size_t rows, std::size_t cols, double alpha, const double* u, const double* v,
         double* a);
// C = A * B with A m x k, B k x n.
void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c);
void transpose(std::size_t rows, std::size_t cols, const double* a, double* at);

}  // namespace dyngraph::kernels
