#pragma once

#include <iosfwd>

#include "dyngraph/embedding.hpp"
#include "dyngraph/matrix.hpp"

namespace dyngraph {

// How a node permutation reaches the maintained pseudoinverse: Direct swaps
// the affected rows/columns of M and M+ by index, Faithful routes the swap
// through four rank-1 pairs and the rank-1 update. Both paths are kept and
// tested against each other.
enum class PermutationPath { Direct, Faithful };

/// Embedding matrix together with its maintained Moore-Penrose pseudoinverse.
/// Updates are O(n*m): the six-case rank-1 pseudoinverse update, Greville
/// appends, and reverse-Greville downdates guarded by a Penrose residual
/// check with a from-scratch fallback.
class PinvState {
public:
    PinvState() = default;

    static PinvState from_scratch(const DenseMatrix& m);
    /// Checkpoint restore; verifies the Penrose conditions before accepting.
    static PinvState from_parts(DenseMatrix m, DenseMatrix mdag, double tol_base);

    const DenseMatrix& m() const { return m_; }
    const DenseMatrix& mdag() const { return mdag_; }
    double tol_base() const { return tol_base_; }
    void set_tol_base(double t) { tol_base_ = t; }
    /// Zero-detection threshold scaled by the current shape.
    double tol() const;

    void rank1_update(const Vector& c, const Vector& d);
    void append_column(const Vector& a);
    void append_row(const Vector& a);
    void remove_last_column();
    void remove_last_row();
    void permute_with_last(int node, PermutationPath path = PermutationPath::Direct);

    void apply_delta(const EmbeddingDelta& delta,
                     PermutationPath path = PermutationPath::Direct);

    /// Scaled max residual of the four Penrose conditions.
    double penrose_residual() const;

    /// Recomputes M+ from scratch, discarding accumulated drift.
    void rebaseline();

    /// Replaces M with an externally maintained exact copy of the same
    /// shape. Additive updates leave ulp-level residue on touched entries;
    /// sessions that can rematerialize the true embedding use this to keep
    /// rank decisions well posed near zero.
    void sync_matrix(const DenseMatrix& exact);

    void write_checkpoint(std::ostream& os) const;
    static PinvState read_checkpoint(std::istream& is);

    /// Mutations since the last from-scratch rebaseline.
    std::size_t ops_since_refresh() const { return ops_since_refresh_; }

private:
    DenseMatrix m_;
    DenseMatrix mdag_;
    double tol_base_ = 1e-12;
    std::size_t ops_since_refresh_ = 0;

    // Incremental formulas amplify accumulated roundoff; a periodic
    // from-scratch rebaseline keeps the drift floor near machine precision
    // at O(nm^2 / kRefreshInterval) amortized cost.
    static constexpr std::size_t kRefreshInterval = 24;
    void count_mutation();
};

PinvState pinv_from_scratch(const DenseMatrix& m);

}  // namespace dyngraph
