#pragma once

#include <iosfwd>
#include <optional>

#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"
#include "dyngraph/pinv.hpp"

namespace dyngraph {

/// Least-squares graph regression session: owns the graph, the maintained
/// pseudoinverse, the observation vector b and the current solution
/// x = M+ b. Each update applies the embedding delta through the pinv
/// engine and keeps b in lockstep (permute / truncate / extend).
class L2State {
public:
    static L2State init(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b);

    void update(const GraphUpdate& u, std::optional<double> b_new = std::nullopt);

    const DynamicGraph& graph() const { return graph_; }
    const EmbeddingKind& kind() const { return kind_; }
    const PinvState& pinv() const { return pinv_; }
    const Vector& b() const { return b_; }
    const Vector& x() const { return x_; }

    /// ||M x - b||_2 for the current state.
    double residual() const;

    std::size_t last_pair_count() const { return last_pair_count_; }

    void set_permutation_path(PermutationPath p) { path_ = p; }
    PermutationPath permutation_path() const { return path_; }
    void set_pinv_tol(double t) { pinv_.set_tol_base(t); }

    void write_checkpoint(std::ostream& os) const;
    static L2State read_checkpoint(std::istream& is, const DynamicGraph& g,
                                   const EmbeddingKind& kind);

private:
    DynamicGraph graph_;
    EmbeddingKind kind_;
    PinvState pinv_;
    Vector b_;
    Vector x_;
    std::size_t last_pair_count_ = 0;
    PermutationPath path_ = PermutationPath::Direct;

    void refresh_solution();
    void refine_solution();
};

L2State init_l2(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b);

}  // namespace dyngraph
