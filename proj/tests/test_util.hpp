#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"
#include "dyngraph/matrix.hpp"

namespace testutil {

using dyngraph::DenseMatrix;
using dyngraph::DynamicGraph;
using dyngraph::GraphUpdate;
using dyngraph::Vector;

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = dist(rng);
    return m;
}

inline DenseMatrix random_low_rank(std::size_t rows, std::size_t cols, std::size_t rank,
                                   std::mt19937_64& rng) {
    DenseMatrix a = random_matrix(rows, rank, rng);
    DenseMatrix b = random_matrix(rank, cols, rng);
    return a * b;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline double random_weight(std::mt19937_64& rng, bool integer = false) {
    if (integer) {
        std::uniform_int_distribution<int> dist(1, 5);
        std::bernoulli_distribution neg(0.5);
        const int w = dist(rng);
        return neg(rng) ? -w : w;
    }
    std::uniform_real_distribution<double> mag(0.25, 1.5);
    std::bernoulli_distribution neg(0.5);
    const double w = mag(rng);
    return neg(rng) ? -w : w;
}

inline DynamicGraph random_graph(int n, bool directed, double edge_prob, std::mt19937_64& rng,
                                 bool integer_weights = false, bool positive_weights = false) {
    DynamicGraph g(n, directed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 1; i <= n; ++i) {
        for (int j = directed ? 1 : i + 1; j <= n; ++j) {
            if (!directed && j <= i) continue;
            if (directed && i == j) continue;
            if (coin(rng) < edge_prob) {
                double w = random_weight(rng, integer_weights);
                if (positive_weights) w = std::abs(w);
                g.set_edge(i, j, w);
                if (!directed) g.set_edge(j, i, w);
            }
        }
    }
    return g;
}

struct UpdateOptions {
    bool allow_node_ops = true;
    int min_nodes = 2;
    int max_nodes = 40;
    bool integer_weights = false;
    bool positive_weights = false;
    int max_insert_edges = 3;
    // When set, edge sources are restricted to this many leading rows and
    // node inserts carry incoming edges only (keeps the rank planted).
    std::optional<int> row_support;
};

// A random update valid for g; node ops respect the size bounds.
inline GraphUpdate random_update(const DynamicGraph& g, std::mt19937_64& rng,
                                 const UpdateOptions& opt = {}) {
    using namespace dyngraph;
    std::uniform_int_distribution<int> pick_kind(0, 99);
    const int n = g.node_count();
    auto rand_node = [&](int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(rng);
    };
    auto weight = [&] {
        double w = random_weight(rng, opt.integer_weights);
        return opt.positive_weights ? std::abs(w) : w;
    };
    const int src_limit = opt.row_support ? std::min(*opt.row_support, n) : n;

    for (int attempt = 0; attempt < 400; ++attempt) {
        const int r = pick_kind(rng);
        if (r < 30) {  // edge insert
            if (n < 2) continue;
            const int i = rand_node(1, src_limit), j = rand_node(1, n);
            if (i == j || g.has_edge(i, j)) continue;
            return EdgeInsert{i, j, weight()};
        }
        if (r < 55) {  // weight change
            if (g.weights().empty()) continue;
            std::uniform_int_distribution<std::size_t> pick(0, g.weights().size() - 1);
            auto it = g.weights().begin();
            std::advance(it, pick(rng));
            auto [i, j] = it->first;
            if (!g.directed() && i > j) std::swap(i, j);
            if (opt.row_support && i > src_limit) continue;
            return WeightChange{i, j, weight()};
        }
        if (r < 75) {  // edge delete
            if (g.weights().empty()) continue;
            std::uniform_int_distribution<std::size_t> pick(0, g.weights().size() - 1);
            auto it = g.weights().begin();
            std::advance(it, pick(rng));
            auto [i, j] = it->first;
            if (!g.directed() && i > j) std::swap(i, j);
            if (opt.row_support && i > src_limit) continue;
            return EdgeDelete{i, j};
        }
        if (r < 90) {  // node insert
            if (!opt.allow_node_ops || n >= opt.max_nodes) continue;
            NodeInsert ni;
            std::vector<int> used;
            const int edges = n == 0 ? 0 : rand_node(0, std::min(opt.max_insert_edges, n));
            while (static_cast<int>(ni.edges.size()) < edges) {
                const int j = rand_node(1, n);
                if (std::find(used.begin(), used.end(), j) != used.end()) continue;
                used.push_back(j);
                const bool incoming = opt.row_support ? true : (g.directed() && rand_node(0, 1));
                ni.edges.push_back(IncidentEdge{j, weight(), incoming});
            }
            if (opt.row_support) {
                // Incoming edges must start inside the supported rows.
                bool ok = true;
                for (auto& e : ni.edges) ok = ok && e.node <= src_limit;
                if (!ok) continue;
            }
            return ni;
        }
        // node delete
        if (!opt.allow_node_ops || n <= opt.min_nodes) continue;
        return NodeDelete{rand_node(1, n)};
    }
    // Fall back to a weight change on some edge, or a node insert.
    if (!g.weights().empty()) {
        auto [i, j] = g.weights().begin()->first;
        if (!g.directed() && i > j) std::swap(i, j);
        return WeightChange{i, j, weight()};
    }
    return NodeInsert{};
}

inline double rel_frob_diff(const DenseMatrix& a, const DenseMatrix& b) {
    return frobenius_norm(a - b) / (1.0 + frobenius_norm(b));
}

}  // namespace testutil
