#include "dyngraph/graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace dyngraph {

double DynamicGraph::weight(int i, int j) const {
    auto it = weights_.find({i, j});
    return it == weights_.end() ? 0.0 : it->second;
}

double DynamicGraph::weighted_degree(int i) const {
    double d = 0.0;
    for (auto it = weights_.lower_bound({i, 0}); it != weights_.end() && it->first.first == i;
         ++it)
        d += it->second;
    return d;
}

std::vector<int> DynamicGraph::out_neighbors(int i) const {
    std::vector<int> ns;
    for (auto it = weights_.lower_bound({i, 0}); it != weights_.end() && it->first.first == i;
         ++it)
        if (it->first.second != i) ns.push_back(it->first.second);
    return ns;
}

bool DynamicGraph::any_self_loop() const {
    for (const auto& [e, w] : weights_)
        if (e.first == e.second) return true;
    return false;
}

void DynamicGraph::set_edge(int i, int j, double w) {
    if (!std::isfinite(w) || w == 0.0) throw InvalidWeight("edge weight must be finite nonzero");
    weights_[{i, j}] = w;
}

void DynamicGraph::erase_edge(int i, int j) { weights_.erase({i, j}); }

void DynamicGraph::check_node(int i) const {
    if (i < 1 || i > n_)
        throw UpdateConflict("node id " + std::to_string(i) + " out of range 1.." +
                             std::to_string(n_));
}

void DynamicGraph::validate() const {
    for (const auto& [e, w] : weights_) {
        check_node(e.first);
        check_node(e.second);
        if (!std::isfinite(w) || w == 0.0) throw InvalidWeight("stored weight invalid");
        if (!directed_ && weight(e.second, e.first) != w)
            throw UpdateConflict("undirected symmetry violated");
    }
}

OpKind kind_of(const GraphUpdate& u) {
    return std::visit(
        [](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, EdgeInsert>) return OpKind::EdgeInsert;
            if constexpr (std::is_same_v<T, EdgeDelete>) return OpKind::EdgeDelete;
            if constexpr (std::is_same_v<T, WeightChange>) return OpKind::WeightChange;
            if constexpr (std::is_same_v<T, NodeInsert>) return OpKind::NodeInsert;
            if constexpr (std::is_same_v<T, NodeDelete>) return OpKind::NodeDelete;
        },
        u);
}

std::string op_name(const GraphUpdate& u) {
    switch (kind_of(u)) {
        case OpKind::EdgeInsert: return "edge_insert";
        case OpKind::EdgeDelete: return "edge_delete";
        case OpKind::WeightChange: return "weight_change";
        case OpKind::NodeInsert: return "node_insert";
        case OpKind::NodeDelete: return "node_delete";
    }
    return "?";
}

namespace {

void check_weight(double w) {
    if (!std::isfinite(w) || w == 0.0) throw InvalidWeight("weight must be finite and nonzero");
}

void insert_edge(DynamicGraph& g, int i, int j, double w) {
    g.set_edge(i, j, w);
    if (!g.directed() && i != j) g.set_edge(j, i, w);
}

void delete_edge(DynamicGraph& g, int i, int j) {
    g.erase_edge(i, j);
    if (!g.directed() && i != j) g.erase_edge(j, i);
}

}  // namespace

DynamicGraph apply_update(const DynamicGraph& g, const GraphUpdate& u) {
    DynamicGraph out = g;
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, EdgeInsert>) {
                out.check_node(op.i);
                out.check_node(op.j);
                check_weight(op.w);
                if (out.has_edge(op.i, op.j)) throw UpdateConflict("edge already present");
                insert_edge(out, op.i, op.j, op.w);
            } else if constexpr (std::is_same_v<T, EdgeDelete>) {
                out.check_node(op.i);
                out.check_node(op.j);
                if (!out.has_edge(op.i, op.j)) throw UpdateConflict("edge not present");
                delete_edge(out, op.i, op.j);
            } else if constexpr (std::is_same_v<T, WeightChange>) {
                out.check_node(op.i);
                out.check_node(op.j);
                check_weight(op.w);
                if (!out.has_edge(op.i, op.j)) throw UpdateConflict("edge not present");
                insert_edge(out, op.i, op.j, op.w);
            } else if constexpr (std::is_same_v<T, NodeInsert>) {
                const int fresh = out.node_count() + 1;
                std::set<std::pair<int, bool>> seen;
                for (const IncidentEdge& e : op.edges) {
                    out.check_node(e.node);
                    check_weight(e.weight);
                    const bool dir = out.directed() && e.incoming;
                    if (!seen.insert({e.node, dir}).second)
                        throw UpdateConflict("duplicate incident edge in node insert");
                }
                out.set_node_count(fresh);
                for (const IncidentEdge& e : op.edges) {
                    if (out.directed() && e.incoming)
                        out.set_edge(e.node, fresh, e.weight);
                    else
                        insert_edge(out, fresh, e.node, e.weight);
                }
            } else if constexpr (std::is_same_v<T, NodeDelete>) {
                out.check_node(op.i);
                auto [permuted, tau] = permute_with_last(out, op.i);
                const int last = permuted.node_count();
                DynamicGraph shrunk(last - 1, permuted.directed());
                for (const auto& [e, w] : permuted.weights())
                    if (e.first != last && e.second != last)
                        shrunk.set_edge(e.first, e.second, w);
                out = shrunk;
            }
        },
        u);
    return out;
}

std::pair<DynamicGraph, Transposition> permute_with_last(const DynamicGraph& g, int i) {
    g.check_node(i);
    const int n = g.node_count();
    Transposition tau{i, n};
    if (i == n) return {g, tau};
    auto relabel = [&](int v) { return v == i ? n : (v == n ? i : v); };
    DynamicGraph out(n, g.directed());
    for (const auto& [e, w] : g.weights()) out.set_edge(relabel(e.first), relabel(e.second), w);
    return {out, tau};
}

void write_graph(std::ostream& os, const DynamicGraph& g) {
    os << "graph " << g.node_count() << ' ' << (g.directed() ? "directed" : "undirected") << '\n';
    char buf[32];
    for (const auto& [e, w] : g.weights()) {
        if (!g.directed() && e.first > e.second) continue;  // one line per unordered pair
        std::snprintf(buf, sizeof(buf), "%.17g", w);
        os << "edge " << e.first << ' ' << e.second << ' ' << buf << '\n';
    }
}

namespace {

struct LineReader {
    std::istream& is;
    int lineno = 0;
    bool next(std::string& out) {
        std::string line;
        while (std::getline(is, line)) {
            ++lineno;
            std::size_t pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            out = line;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    }
};

}  // namespace

DynamicGraph read_graph(std::istream& is) {
    LineReader r{is};
    std::string line;
    if (!r.next(line)) throw ParseError("graph: empty input");
    std::istringstream hs(line);
    std::string tag, mode;
    int n = 0;
    if (!(hs >> tag >> n >> mode) || tag != "graph" ||
        (mode != "directed" && mode != "undirected"))
        r.fail("expected 'graph <n> <directed|undirected>'");
    DynamicGraph g(n, mode == "directed");
    while (r.next(line)) {
        std::istringstream ls(line);
        int i, j;
        double w;
        if (!(ls >> tag >> i >> j >> w) || tag != "edge") r.fail("expected 'edge <i> <j> <w>'");
        if (i < 1 || i > n || j < 1 || j > n) r.fail("node id out of range");
        if (!std::isfinite(w) || w == 0.0) r.fail("invalid weight");
        if (g.has_edge(i, j)) r.fail("duplicate edge");
        insert_edge(g, i, j, w);
    }
    g.validate();
    return g;
}

DynamicGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path);
    return read_graph(f);
}

std::vector<GraphUpdate> read_ops(std::istream& is) {
    LineReader r{is};
    std::vector<GraphUpdate> ops;
    std::string line;
    while (r.next(line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "ei") {
            int i, j;
            double w;
            if (!(ls >> i >> j >> w)) r.fail("expected 'ei i j w'");
            ops.push_back(EdgeInsert{i, j, w});
        } else if (tag == "ed") {
            int i, j;
            if (!(ls >> i >> j)) r.fail("expected 'ed i j'");
            ops.push_back(EdgeDelete{i, j});
        } else if (tag == "wc") {
            int i, j;
            double w;
            if (!(ls >> i >> j >> w)) r.fail("expected 'wc i j w'");
            ops.push_back(WeightChange{i, j, w});
        } else if (tag == "ni") {
            int k;
            if (!(ls >> k) || k < 0) r.fail("expected 'ni k ...'");
            NodeInsert ni;
            for (int t = 0; t < k; ++t) {
                int node;
                double w;
                if (!(ls >> node >> w)) r.fail("truncated node insert");
                if (node == 0) r.fail("node id 0 in node insert");
                ni.edges.push_back(IncidentEdge{std::abs(node), w, node < 0});
            }
            ops.push_back(std::move(ni));
        } else if (tag == "nd") {
            int i;
            if (!(ls >> i)) r.fail("expected 'nd i'");
            ops.push_back(NodeDelete{i});
        } else {
            r.fail("unknown op '" + tag + "'");
        }
    }
    return ops;
}

std::vector<GraphUpdate> load_ops(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path);
    return read_ops(f);
}

std::string format_op(const GraphUpdate& u) {
    std::ostringstream os;
    char buf[32];
    auto num = [&](double w) {
        std::snprintf(buf, sizeof(buf), "%.17g", w);
        return std::string(buf);
    };
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, EdgeInsert>)
                os << "ei " << op.i << ' ' << op.j << ' ' << num(op.w);
            else if constexpr (std::is_same_v<T, EdgeDelete>)
                os << "ed " << op.i << ' ' << op.j;
            else if constexpr (std::is_same_v<T, WeightChange>)
                os << "wc " << op.i << ' ' << op.j << ' ' << num(op.w);
            else if constexpr (std::is_same_v<T, NodeInsert>) {
                os << "ni " << op.edges.size();
                for (const IncidentEdge& e : op.edges)
                    os << ' ' << (e.incoming ? -e.node : e.node) << ' ' << num(e.weight);
            } else if constexpr (std::is_same_v<T, NodeDelete>)
                os << "nd " << op.i;
        },
        u);
    return os.str();
}

}  // namespace dyngraph
