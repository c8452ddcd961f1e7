#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dyngraph/graph.hpp"
#include "dyngraph/matrix.hpp"

namespace dyngraph {

enum class EmbeddingType { Adjacency, Laplacian };

struct EmbeddingKind {
    EmbeddingType type = EmbeddingType::Adjacency;
    // Degree bound C; required for Laplacian node operations.
    std::optional<int> degree_bound;

    bool laplacian() const { return type == EmbeddingType::Laplacian; }
    static EmbeddingKind adjacency() { return {EmbeddingType::Adjacency, std::nullopt}; }
    static EmbeddingKind laplacian_kind(std::optional<int> bound = std::nullopt) {
        return {EmbeddingType::Laplacian, bound};
    }
};

// Which graph operations each maintained quantity supports for a kind.
// The cost function label is documentation, not runtime data.
struct EmbeddingCapabilities {
    std::array<bool, 5> l2_ops{};
    std::array<bool, 5> svd_ops{};
    std::array<bool, 5> l1_ops{};
    std::string cost_function;

    static std::size_t index(OpKind k) { return static_cast<std::size_t>(k); }
    bool l2(OpKind k) const { return l2_ops[index(k)]; }
    bool svd(OpKind k) const { return svd_ops[index(k)]; }
    bool l1(OpKind k) const { return l1_ops[index(k)]; }
};

EmbeddingCapabilities capabilities(const EmbeddingKind& kind);

/// One rank-1 term: adds c * d^T when applied.
struct UpdatePair {
    Vector c, d;
};

struct ApplyPair {
    UpdatePair pair;
};
struct AppendColumn {
    Vector values;
};
struct AppendRow {
    Vector values;
};
struct RemoveLastColumn {};
struct RemoveLastRow {};
struct PermuteWithLast {
    int node;  // 1-based id exchanged with the last one
};

using DeltaStep = std::variant<ApplyPair, AppendColumn, AppendRow, RemoveLastColumn,
                               RemoveLastRow, PermuteWithLast>;

// Ordered step list describing how one graph update changes the embedding:
// permutation first, then structural append/remove, then rank-1 pairs.
struct EmbeddingDelta {
    std::vector<DeltaStep> steps;
    std::size_t pair_count() const;
};

DenseMatrix materialize(const DynamicGraph& g, const EmbeddingKind& kind);

EmbeddingDelta delta_for_update(const DynamicGraph& before, const GraphUpdate& u,
                                const EmbeddingKind& kind);

DenseMatrix apply_delta(const DenseMatrix& m, const EmbeddingDelta& delta);
void apply_delta_inplace(DenseMatrix& m, const EmbeddingDelta& delta);

/// The four rank-1 pairs that exchange column and row `i` with the last ones
/// of a square matrix: two pairs for the column swap, two for the row swap.
/// The row pairs are stated against the matrix with columns already swapped,
/// so the list must be applied in order. Empty when i is already last.
std::vector<UpdatePair> swap_pairs_for_permutation(const DenseMatrix& m, int node);

}  // namespace dyngraph
