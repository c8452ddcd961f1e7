#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dyngraph/errors.hpp"

namespace dyngraph {

// Node ids are 1-based and contiguous 1..n at all times; deletion compacts
// by permuting the victim with the last node and dropping the last id.
// Undirected graphs store both orientations of every edge.
class DynamicGraph {
public:
    using EdgeMap = std::map<std::pair<int, int>, double>;

    DynamicGraph() = default;
    DynamicGraph(int n, bool directed) : n_(n), directed_(directed) {
        if (n < 0) throw UpdateConflict("graph: negative node count");
    }

    int node_count() const { return n_; }
    bool directed() const { return directed_; }
    const EdgeMap& weights() const { return weights_; }

    bool has_edge(int i, int j) const { return weights_.count({i, j}) > 0; }
    double weight(int i, int j) const;

    /// Weighted degree sum_j W(i, j).
    double weighted_degree(int i) const;
    /// Distinct j != i with an edge entry (i, j).
    std::vector<int> out_neighbors(int i) const;
    bool has_self_loop(int i) const { return has_edge(i, i); }
    bool any_self_loop() const;

    void set_edge(int i, int j, double w);
    void erase_edge(int i, int j);
    void set_node_count(int n) { n_ = n; }

    void check_node(int i) const;
    void validate() const;

private:
    int n_ = 0;
    bool directed_ = false;
    EdgeMap weights_;
};

struct EdgeInsert {
    int i, j;
    double w;
};
struct EdgeDelete {
    int i, j;
};
struct WeightChange {
    int i, j;
    double w;  // new absolute weight; engines derive the delta themselves
};
struct IncidentEdge {
    int node;
    double weight;
    bool incoming = false;  // meaningful for directed graphs only
};
struct NodeInsert {
    std::vector<IncidentEdge> edges;
};
struct NodeDelete {
    int i;
};

using GraphUpdate = std::variant<EdgeInsert, EdgeDelete, WeightChange, NodeInsert, NodeDelete>;

enum class OpKind { EdgeInsert, EdgeDelete, WeightChange, NodeInsert, NodeDelete };

OpKind kind_of(const GraphUpdate& u);
std::string op_name(const GraphUpdate& u);

/// Applies u to g after validating it; throws UpdateConflict / InvalidWeight.
DynamicGraph apply_update(const DynamicGraph& g, const GraphUpdate& u);

/// The transposition (i <-> n) recorded when a node is moved to the back.
struct Transposition {
    int a = 0, b = 0;
    bool identity() const { return a == b; }
};

std::pair<DynamicGraph, Transposition> permute_with_last(const DynamicGraph& g, int i);

// Text formats.
//   graph file: "graph <n> <directed|undirected>" header, then
//               "edge <i> <j> <w>" lines; '#' starts a comment.
//   ops file:   one op per line: "ei i j w", "ed i j", "wc i j w",
//               "ni k i1 w1 ... ik wk", "nd i". In directed graphs a
//               negative ik marks an incoming edge ik -> new node.
void write_graph(std::ostream& os, const DynamicGraph& g);
DynamicGraph read_graph(std::istream& is);
DynamicGraph load_graph(const std::string& path);

std::vector<GraphUpdate> read_ops(std::istream& is);
std::vector<GraphUpdate> load_ops(const std::string& path);
std::string format_op(const GraphUpdate& u);

}  // namespace dyngraph
