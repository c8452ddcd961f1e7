#pragma once

#include <iosfwd>

#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"
#include "dyngraph/matrix.hpp"

namespace dyngraph {

/// Thin, rank-capped SVD of the embedding matrix, maintained exactly under
/// rank-1 updates and row/column appends. Factors are kept in product form
/// (outer orthonormal basis times a small inner rotation) so one update costs
/// O((n+m)k + k^3) amortized; the outer bases are compressed and
/// re-orthonormalized periodically. Node deletion is not supported.
class SvdState {
public:
    SvdState() = default;

    static SvdState from_scratch(const DenseMatrix& m, std::size_t rank_cap,
                                 double trunc_tol = 1e-12);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t rank() const { return sigma_.size(); }
    std::size_t rank_cap() const { return rank_cap_; }
    double trunc_tol() const { return trunc_tol_; }
    const Vector& sigma() const { return sigma_; }

    /// Left/right factors materialized from the product form.
    DenseMatrix u() const;
    DenseMatrix v() const;
    /// U * diag(sigma) * V^T.
    DenseMatrix low_rank_approx() const;

    void rank1_update(const Vector& c, const Vector& d);
    void append_column(const Vector& a);
    void append_row(const Vector& a);

    /// Applies the embedding delta of one graph update and returns the number
    /// of rank-1 pairs it carried. Node deletion is rejected: the maintained
    /// factorization has no removal path.
    std::size_t update_for_graph(const DynamicGraph& g_before, const GraphUpdate& op,
                                 const EmbeddingKind& kind);

    /// ||U^T U - I||_F + ||V^T V - I||_F of the materialized factors.
    double orthogonality_drift() const;

    void write_checkpoint(std::ostream& os) const;
    static SvdState read_checkpoint(std::istream& is);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::size_t rank_cap_ = 0;
    double trunc_tol_ = 1e-12;

    DenseMatrix u_outer_;  // rows_ x s, orthonormal columns
    DenseMatrix u_inner_;  // s x k, orthonormal columns
    DenseMatrix v_outer_;  // cols_ x t
    DenseMatrix v_inner_;  // t x k
    Vector sigma_;         // k positive, nonincreasing

    std::size_t effective_cap() const {
        return std::min(rank_cap_, std::min(rows_, cols_));
    }
    void set_from_thin(const DenseMatrix& u, Vector sigma, const DenseMatrix& v);
    void rediagonalize(DenseMatrix core, bool extended_u, bool extended_v);
    void compress();
};

/// Full SVD of a small dense matrix by one-sided Jacobi; used for the update
/// cores and kept separate from the LAPACK-backed oracle on purpose.
struct SmallSvd {
    DenseMatrix u;
    Vector sigma;
    DenseMatrix v;
};
SmallSvd jacobi_svd(const DenseMatrix& a);

}  // namespace dyngraph
