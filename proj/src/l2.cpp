#include "dyngraph/l2.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "dyngraph/kernels.hpp"

namespace dyngraph {

L2State L2State::init(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b) {
    if (b.size() != static_cast<std::size_t>(g.node_count()))
        throw ShapeMismatch("init_l2: b length must equal the node count");
    L2State s;
    s.graph_ = g;
    s.kind_ = kind;
    s.pinv_ = PinvState::from_scratch(materialize(g, kind));
    s.b_ = b;
    s.refresh_solution();
    return s;
}

L2State init_l2(const DynamicGraph& g, const EmbeddingKind& kind, const Vector& b) {
    return L2State::init(g, kind, b);
}

void L2State::refresh_solution() {
    const DenseMatrix& mdag = pinv_.mdag();
    x_.assign(mdag.rows(), 0.0);
    kernels::matvec(mdag.rows(), mdag.cols(), mdag.data(), b_.data(), x_.data());
    refine_solution();

    // Self-checks on the two defining properties of x = M+ b: membership in
    // the row space of M, and stationarity M^T (M x - b) = 0. Drift above
    // the contract scale triggers a from-scratch rebaseline of M+.
    const DenseMatrix& m = pinv_.m();
    if (m.rows() == 0 || m.cols() == 0) return;
    Vector mx(m.rows()), proj(m.cols());
    kernels::matvec(m.rows(), m.cols(), m.data(), x_.data(), mx.data());
    kernels::matvec(mdag.rows(), mdag.cols(), mdag.data(), mx.data(), proj.data());
    kernels::axpy(proj.size(), -1.0, x_.data(), proj.data());
    const double row_dev = kernels::nrm2(proj.data(), proj.size());
    const double row_scale = 1.0 + kernels::nrm2(x_.data(), x_.size());

    Vector r = mx;
    kernels::axpy(r.size(), -1.0, b_.data(), r.data());
    Vector stat(m.cols());
    kernels::matvec_t(m.rows(), m.cols(), m.data(), r.data(), stat.data());
    const double norm_m = frobenius_norm(m);
    const double stat_scale =
        norm_m * (norm_m * kernels::nrm2(x_.data(), x_.size()) +
                  kernels::nrm2(b_.data(), b_.size())) +
        1.0;

    if (row_dev > 5e-10 * row_scale ||
        kernels::nrm2(stat.data(), stat.size()) > 3e-11 * stat_scale) {
        pinv_.rebaseline();
        x_.assign(mdag.rows(), 0.0);
        kernels::matvec(mdag.rows(), mdag.cols(), mdag.data(), b_.data(), x_.data());
        refine_solution();
    }
}

// One iterative-refinement pass: contracts the residual-relevant part of
// the error in x far below what the maintained M+ alone delivers.
void L2State::refine_solution() {
    const DenseMatrix& m = pinv_.m();
    const DenseMatrix& mdag = pinv_.mdag();
    if (m.rows() == 0 || m.cols() == 0) return;
    Vector r(m.rows()), dx(m.cols());
    kernels::matvec(m.rows(), m.cols(), m.data(), x_.data(), r.data());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b_[i] - r[i];
    kernels::matvec(mdag.rows(), mdag.cols(), mdag.data(), r.data(), dx.data());
    kernels::axpy(x_.size(), 1.0, dx.data(), x_.data());
}

void L2State::update(const GraphUpdate& u, std::optional<double> b_new) {
    if (kind_of(u) == OpKind::NodeInsert && !b_new)
        throw MissingObservation("node insert requires a new observation for b");

    const EmbeddingDelta delta = delta_for_update(graph_, u, kind_);
    for (const DeltaStep& step : delta.steps) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ApplyPair>) {
                    pinv_.rank1_update(s.pair.c, s.pair.d);
                } else if constexpr (std::is_same_v<T, AppendColumn>) {
                    pinv_.append_column(s.values);
                } else if constexpr (std::is_same_v<T, AppendRow>) {
                    pinv_.append_row(s.values);
                    b_.push_back(*b_new);
                } else if constexpr (std::is_same_v<T, RemoveLastColumn>) {
                    pinv_.remove_last_column();
                } else if constexpr (std::is_same_v<T, RemoveLastRow>) {
                    pinv_.remove_last_row();
                    b_.pop_back();
                } else if constexpr (std::is_same_v<T, PermuteWithLast>) {
                    pinv_.permute_with_last(s.node, path_);
                    std::swap(b_[s.node - 1], b_.back());
                }
            },
            step);
    }
    graph_ = apply_update(graph_, u);
    last_pair_count_ = delta.pair_count();
    pinv_.sync_matrix(materialize(graph_, kind_));
    refresh_solution();
}

double L2State::residual() const {
    const DenseMatrix& m = pinv_.m();
    Vector r(m.rows());
    kernels::matvec(m.rows(), m.cols(), m.data(), x_.data(), r.data());
    kernels::axpy(r.size(), -1.0, b_.data(), r.data());
    return kernels::nrm2(r.data(), r.size());
}

void L2State::write_checkpoint(std::ostream& os) const {
    pinv_.write_checkpoint(os);
    write_vector(os, b_);
}

L2State L2State::read_checkpoint(std::istream& is, const DynamicGraph& g,
                                 const EmbeddingKind& kind) {
    L2State s;
    s.pinv_ = PinvState::read_checkpoint(is);
    s.b_ = read_vector(is);
    if (s.b_.size() != s.pinv_.m().rows())
        throw ParseError("l2 checkpoint: b length mismatch");
    const DenseMatrix expected = materialize(g, kind);
    if (expected.rows() != s.pinv_.m().rows() || expected.cols() != s.pinv_.m().cols())
        throw ParseError("l2 checkpoint: embedding shape mismatch");
    s.graph_ = g;
    s.kind_ = kind;
    s.refresh_solution();
    return s;
}

}  // namespace dyngraph
