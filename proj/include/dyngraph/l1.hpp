#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"
#include "dyngraph/matrix.hpp"

namespace dyngraph {

struct L1Certificate {
    double eq_residual = 0.0;   // ||M^T s||_inf, should vanish
    double bound_excess = 0.0;  // max(0, ||s||_inf - 1)
    bool sign_match = true;     // s_i = sign(r_i) wherever r_i != 0
    bool ok = false;
};

/// Least-absolute-deviation regression state: exact minimizer of
/// ||M x - b||_1 via the LP  min 1^T(u + v)  s.t.  M(xp - xn) + u - v = b,
/// solved by a dense tableau simplex (Dantzig rule, Bland after a stall).
/// Updates patch M by the embedding delta's rank-1 pairs and re-optimize
/// warm-started from the previous basis.
class L1State {
public:
    /// Matrix-level scratch solve.
    static L1State solve(const DenseMatrix& m, const Vector& b);
    /// Graph-aware session; enables update().
    static L1State init(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b);

    /// Edge insertion/deletion/weight change only; node operations are
    /// rejected. Requires a graph-aware state.
    void update(const GraphUpdate& u);

    /// Rank-1 patch plus warm re-optimization, for matrix-level callers.
    void apply_rank1_and_resolve(const Vector& c, const Vector& d);

    const DenseMatrix& m() const { return m_; }
    const Vector& b() const { return b_; }
    const Vector& x() const { return x_; }
    double objective() const { return objective_; }

    /// Rows with zero residual (the active set backing the optimality basis).
    std::vector<std::size_t> active_rows() const;
    /// Subdifferential optimality test via the simplex multipliers.
    L1Certificate certificate() const;

    std::size_t scratch_pivots() const { return scratch_pivots_; }
    std::size_t last_update_pivots() const { return last_update_pivots_; }
    /// True when the last warm start had to fall back to a scratch solve.
    bool last_update_fell_back() const { return last_fell_back_; }

    bool graph_aware() const { return graph_.has_value(); }
    const DynamicGraph& graph() const;
    std::size_t last_pair_count() const { return last_pair_count_; }

private:
    DenseMatrix m_;
    Vector b_;
    Vector x_;
    double objective_ = 0.0;
    std::vector<std::size_t> basis_;  // basic variable indices, one per row

    std::optional<DynamicGraph> graph_;
    EmbeddingKind kind_;

    std::size_t scratch_pivots_ = 0;
    std::size_t last_update_pivots_ = 0;
    std::size_t last_pair_count_ = 0;
    bool last_fell_back_ = false;

    void solve_scratch();
    void resolve_warm();
    void extract_solution(const std::vector<double>& xb);
};

L1State solve_l1(const DenseMatrix& m, const Vector& b);

}  // namespace dyngraph
