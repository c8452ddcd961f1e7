#pragma once

#include "dyngraph/matrix.hpp"

// From-scratch reference computations. Everything here is independent of the
// incremental engines: a different SVD backend, a separately coded simplex
// with a different pivot rule. Tests and the CLI --verify mode compare engine
// states against these; the pinv engine also falls back to oracle_pinv when a
// downdate fails its residual check.

namespace dyngraph::oracle {

struct SvdResult {
    DenseMatrix U;  // n x k, orthonormal columns
    Vector sigma;   // k positive, nonincreasing
    DenseMatrix V;  // m x k, orthonormal columns
    std::size_t rank() const { return sigma.size(); }
};

// Singular values below this fraction of sigma[0] count as zero.
inline constexpr double kRankCutoff = 1e-12;

// Thin SVD trimmed to numerical rank. Left singular vectors follow a
// deterministic sign convention: first significant component nonnegative.
SvdResult svd(const DenseMatrix& m);

// V * Sigma^+ * U^T.
DenseMatrix pinv(const DenseMatrix& m);

// Minimum-norm least squares solution pinv(m) * b.
Vector lstsq(const DenseMatrix& m, const Vector& b);

struct L1Result {
    Vector x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

// Exact least-absolute-deviation solve: min ||m x - b||_1 as a linear
// program, revised simplex with Bland's rule throughout.
L1Result l1(const DenseMatrix& m, const Vector& b);

// Max residual of the four Penrose conditions, each scaled by the norm of
// the quantity it should reproduce. Zero (up to roundoff) iff p = m^+.
double penrose_residual(const DenseMatrix& m, const DenseMatrix& p);

}  // namespace dyngraph::oracle
