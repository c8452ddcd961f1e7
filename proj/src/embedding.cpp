#include "dyngraph/embedding.hpp"

#include <cmath>

#include "dyngraph/kernels.hpp"

namespace dyngraph {

namespace {

constexpr std::array<bool, 5> kAllOps{true, true, true, true, true};
constexpr std::array<bool, 5> kEdgeOps{true, true, true, false, false};
// Everything but node deletion.
constexpr std::array<bool, 5> kNoNodeDelete{true, true, true, true, false};

Vector unit_scaled(std::size_t n, std::size_t idx, double value) {
    Vector v(n, 0.0);
    v[idx] = value;
    return v;
}

void require_laplacian_ok(const DynamicGraph& g) {
    if (g.directed())
        throw IncompatibleEmbedding("laplacian embedding requires an undirected graph");
    if (g.any_self_loop())
        throw IncompatibleEmbedding("laplacian embedding rejects self-loops");
}

}  // namespace

EmbeddingCapabilities capabilities(const EmbeddingKind& kind) {
    EmbeddingCapabilities caps;
    caps.cost_function = "f(n,m)=n";
    if (!kind.laplacian()) {
        caps.l2_ops = kAllOps;
        caps.svd_ops = kNoNodeDelete;
        caps.l1_ops = kEdgeOps;
    } else if (kind.degree_bound) {
        caps.l2_ops = kAllOps;
        caps.svd_ops = kNoNodeDelete;
        caps.l1_ops = kEdgeOps;
    } else {
        caps.l2_ops = kEdgeOps;
        caps.svd_ops = kEdgeOps;
        caps.l1_ops = kEdgeOps;
    }
    return caps;
}

std::size_t EmbeddingDelta::pair_count() const {
    std::size_t k = 0;
    for (const DeltaStep& s : steps)
        if (std::holds_alternative<ApplyPair>(s)) ++k;
    return k;
}

DenseMatrix materialize(const DynamicGraph& g, const EmbeddingKind& kind) {
    const std::size_t n = static_cast<std::size_t>(g.node_count());
    DenseMatrix m(n, n);
    if (!kind.laplacian()) {
        for (const auto& [e, w] : g.weights()) m(e.first - 1, e.second - 1) = w;
        return m;
    }
    require_laplacian_ok(g);
    for (const auto& [e, w] : g.weights()) {
        m(e.first - 1, e.second - 1) -= w;
        m(e.first - 1, e.first - 1) += w;
    }
    return m;
}

namespace {

// Rank-1 pairs for a single entry change of size q at (i, j), mirrored for
// undirected adjacency; 0-based indices.
void adjacency_entry_pairs(EmbeddingDelta& delta, std::size_t n, bool directed, std::size_t i,
                           std::size_t j, double q) {
    if (q == 0.0) return;
    delta.steps.push_back(ApplyPair{{unit_scaled(n, i, q), unit_scaled(n, j, 1.0)}});
    if (!directed && i != j)
        delta.steps.push_back(ApplyPair{{unit_scaled(n, j, q), unit_scaled(n, i, 1.0)}});
}

// Four pairs touching (i,j), (j,i), (i,i), (j,j); 0-based.
void laplacian_edge_pairs(EmbeddingDelta& delta, std::size_t n, std::size_t i, std::size_t j,
                          double q) {
    if (q == 0.0) return;
    delta.steps.push_back(ApplyPair{{unit_scaled(n, i, -q), unit_scaled(n, j, 1.0)}});
    delta.steps.push_back(ApplyPair{{unit_scaled(n, j, -q), unit_scaled(n, i, 1.0)}});
    delta.steps.push_back(ApplyPair{{unit_scaled(n, i, q), unit_scaled(n, i, 1.0)}});
    delta.steps.push_back(ApplyPair{{unit_scaled(n, j, q), unit_scaled(n, j, 1.0)}});
}

double weight_delta(const DynamicGraph& g, const GraphUpdate& u) {
    if (const auto* ins = std::get_if<EdgeInsert>(&u)) return ins->w;
    if (const auto* del = std::get_if<EdgeDelete>(&u)) return -g.weight(del->i, del->j);
    const auto& wc = std::get<WeightChange>(u);
    return wc.w - g.weight(wc.i, wc.j);
}

}  // namespace

EmbeddingDelta delta_for_update(const DynamicGraph& before, const GraphUpdate& u,
                                const EmbeddingKind& kind) {
    apply_update(before, u);  // validate against the graph invariants
    const std::size_t n = static_cast<std::size_t>(before.node_count());
    const OpKind op = kind_of(u);
    EmbeddingDelta delta;

    if (!kind.laplacian()) {
        switch (op) {
            case OpKind::EdgeInsert:
            case OpKind::EdgeDelete:
            case OpKind::WeightChange: {
                const auto [i, j] = std::visit(
                    [](const auto& v) -> std::pair<int, int> {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, NodeInsert> ||
                                      std::is_same_v<T, NodeDelete>)
                            return {0, 0};
                        else
                            return {v.i, v.j};
                    },
                    u);
                adjacency_entry_pairs(delta, n, before.directed(), i - 1, j - 1,
                                      weight_delta(before, u));
                break;
            }
            case OpKind::NodeInsert: {
                const auto& ni = std::get<NodeInsert>(u);
                Vector incoming(n, 0.0), outgoing(n + 1, 0.0);
                for (const IncidentEdge& e : ni.edges) {
                    if (!before.directed() || e.incoming) incoming[e.node - 1] = e.weight;
                    if (!before.directed() || !e.incoming) outgoing[e.node - 1] = e.weight;
                }
                delta.steps.push_back(AppendColumn{std::move(incoming)});
                delta.steps.push_back(AppendRow{std::move(outgoing)});
                break;
            }
            case OpKind::NodeDelete: {
                const int victim = std::get<NodeDelete>(u).i;
                if (victim != before.node_count())
                    delta.steps.push_back(PermuteWithLast{victim});
                delta.steps.push_back(RemoveLastColumn{});
                delta.steps.push_back(RemoveLastRow{});
                break;
            }
        }
        return delta;
    }

    require_laplacian_ok(before);
    switch (op) {
        case OpKind::EdgeInsert:
        case OpKind::EdgeDelete:
        case OpKind::WeightChange: {
            const auto [i, j] = std::visit(
                [](const auto& v) -> std::pair<int, int> {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, NodeInsert> || std::is_same_v<T, NodeDelete>)
                        return {0, 0};
                    else
                        return {v.i, v.j};
                },
                u);
            if (i == j)
                throw IncompatibleEmbedding("laplacian embedding rejects self-loops");
            laplacian_edge_pairs(delta, n, i - 1, j - 1, weight_delta(before, u));
            break;
        }
        case OpKind::NodeInsert: {
            if (!kind.degree_bound)
                throw IncompatibleEmbedding(
                    "laplacian node operations require a configured degree bound");
            const auto& ni = std::get<NodeInsert>(u);
            if (ni.edges.size() > static_cast<std::size_t>(*kind.degree_bound))
                throw IncompatibleEmbedding("node insert exceeds the degree bound");
            Vector col(n, 0.0), row(n + 1, 0.0);
            double degree = 0.0;
            for (const IncidentEdge& e : ni.edges) {
                col[e.node - 1] = -e.weight;
                row[e.node - 1] = -e.weight;
                degree += e.weight;
            }
            row[n] = degree;
            delta.steps.push_back(AppendColumn{std::move(col)});
            delta.steps.push_back(AppendRow{std::move(row)});
            for (const IncidentEdge& e : ni.edges)
                delta.steps.push_back(ApplyPair{{unit_scaled(n + 1, e.node - 1, e.weight),
                                                 unit_scaled(n + 1, e.node - 1, 1.0)}});
            break;
        }
        case OpKind::NodeDelete: {
            if (!kind.degree_bound)
                throw IncompatibleEmbedding(
                    "laplacian node operations require a configured degree bound");
            const int victim = std::get<NodeDelete>(u).i;
            before.check_node(victim);
            const std::vector<int> neighbors = before.out_neighbors(victim);
            if (neighbors.size() > static_cast<std::size_t>(*kind.degree_bound))
                throw IncompatibleEmbedding("node delete exceeds the degree bound");
            const int last = before.node_count();
            if (victim != last) delta.steps.push_back(PermuteWithLast{victim});
            delta.steps.push_back(RemoveLastColumn{});
            delta.steps.push_back(RemoveLastRow{});
            for (int j : neighbors) {
                const int relabeled = (j == last) ? victim : j;
                const double w = before.weight(victim, j);
                delta.steps.push_back(ApplyPair{{unit_scaled(n - 1, relabeled - 1, -w),
                                                 unit_scaled(n - 1, relabeled - 1, 1.0)}});
            }
            break;
        }
    }
    return delta;
}

void apply_delta_inplace(DenseMatrix& m, const EmbeddingDelta& delta) {
    for (const DeltaStep& step : delta.steps) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ApplyPair>) {
                    if (s.pair.c.size() != m.rows() || s.pair.d.size() != m.cols())
                        throw ShapeMismatch("apply_delta: pair length mismatch");
                    kernels::ger(m.rows(), m.cols(), 1.0, s.pair.c.data(), s.pair.d.data(),
                                 m.data());
                } else if constexpr (std::is_same_v<T, AppendColumn>) {
                    m.append_col(s.values);
                } else if constexpr (std::is_same_v<T, AppendRow>) {
                    m.append_row(s.values);
                } else if constexpr (std::is_same_v<T, RemoveLastColumn>) {
                    m.remove_last_col();
                } else if constexpr (std::is_same_v<T, RemoveLastRow>) {
                    m.remove_last_row();
                } else if constexpr (std::is_same_v<T, PermuteWithLast>) {
                    if (m.rows() != m.cols())
                        throw ShapeMismatch("apply_delta: permute step needs a square matrix");
                    const std::size_t i = static_cast<std::size_t>(s.node - 1);
                    if (i >= m.rows()) throw ShapeMismatch("apply_delta: permute index range");
                    m.swap_cols(i, m.cols() - 1);
                    m.swap_rows(i, m.rows() - 1);
                }
            },
            step);
    }
}

DenseMatrix apply_delta(const DenseMatrix& m, const EmbeddingDelta& delta) {
    DenseMatrix out = m;
    apply_delta_inplace(out, delta);
    return out;
}

std::vector<UpdatePair> swap_pairs_for_permutation(const DenseMatrix& m, int node) {
    if (m.rows() != m.cols()) throw ShapeMismatch("swap pairs: square matrix required");
    const std::size_t n = m.rows();
    const std::size_t i = static_cast<std::size_t>(node - 1);
    if (i >= n) throw ShapeMismatch("swap pairs: node out of range");
    const std::size_t l = n - 1;
    if (i == l) return {};

    std::vector<UpdatePair> pairs;
    // Column exchange, both pairs stated against the current matrix.
    Vector ci(n), cl(n);
    for (std::size_t r = 0; r < n; ++r) {
        ci[r] = m(r, l) - m(r, i);
        cl[r] = m(r, i) - m(r, l);
    }
    pairs.push_back({std::move(ci), unit_scaled(n, i, 1.0)});
    pairs.push_back({std::move(cl), unit_scaled(n, l, 1.0)});

    // Row exchange against the matrix with columns already swapped.
    auto col_swapped = [&](std::size_t r, std::size_t c) {
        const std::size_t cc = c == i ? l : (c == l ? i : c);
        return m(r, cc);
    };
    Vector ri(n), rl(n);
    for (std::size_t c = 0; c < n; ++c) {
        ri[c] = col_swapped(l, c) - col_swapped(i, c);
        rl[c] = col_swapped(i, c) - col_swapped(l, c);
    }
    pairs.push_back({unit_scaled(n, i, 1.0), std::move(ri)});
    pairs.push_back({unit_scaled(n, l, 1.0), std::move(rl)});
    return pairs;
}

}  // namespace dyngraph
