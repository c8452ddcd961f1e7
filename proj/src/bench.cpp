#include "dyngraph/bench.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <vector>

#include "dyngraph/kernels.hpp"
#include "dyngraph/l1.hpp"
#include "dyngraph/l2.hpp"
#include "dyngraph/oracle.hpp"
#include "dyngraph/svd.hpp"

namespace dyngraph::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point t0) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

std::uint64_t median(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0 : v[v.size() / 2];
}

double random_weight(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.25, 1.5);
    std::bernoulli_distribution neg(0.5);
    const double w = mag(rng);
    return neg(rng) ? -w : w;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

std::pair<int, int> random_existing_edge(const DynamicGraph& g, std::mt19937_64& rng) {
    const auto& w = g.weights();
    std::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
    auto it = w.begin();
    std::advance(it, pick(rng));
    return it->first;
}

GraphUpdate make_update(const DynamicGraph& g, OpKind op, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> node(1, g.node_count());
    switch (op) {
        case OpKind::WeightChange: {
            auto [i, j] = random_existing_edge(g, rng);
            return WeightChange{i, j, random_weight(rng)};
        }
        case OpKind::EdgeDelete: {
            auto [i, j] = random_existing_edge(g, rng);
            return EdgeDelete{i, j};
        }
        case OpKind::EdgeInsert: {
            for (int tries = 0; tries < 1000; ++tries) {
                int i = node(rng), j = node(rng);
                if (i != j && !g.has_edge(i, j)) return EdgeInsert{i, j, random_weight(rng)};
            }
            throw UpdateConflict("bench: graph too dense for edge insert");
        }
        case OpKind::NodeInsert: {
            NodeInsert ni;
            std::vector<int> seen;
            while (ni.edges.size() < 3 && static_cast<int>(seen.size()) < g.node_count()) {
                int j = node(rng);
                if (std::find(seen.begin(), seen.end(), j) == seen.end()) {
                    seen.push_back(j);
                    ni.edges.push_back(IncidentEdge{j, std::abs(random_weight(rng)), false});
                }
            }
            return ni;
        }
        case OpKind::NodeDelete:
            return NodeDelete{node(rng)};
    }
    throw UpdateConflict("bench: unknown op kind");
}

std::string embedding_name(const EmbeddingKind& kind) {
    return kind.laplacian() ? "laplacian" : "adjacency";
}

std::string op_kind_name(OpKind op) {
    switch (op) {
        case OpKind::EdgeInsert: return "edge_insert";
        case OpKind::EdgeDelete: return "edge_delete";
        case OpKind::WeightChange: return "weight_change";
        case OpKind::NodeInsert: return "node_insert";
        case OpKind::NodeDelete: return "node_delete";
    }
    return "?";
}

}  // namespace

DynamicGraph random_graph(std::size_t n, bool directed, double avg_degree, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DynamicGraph g(static_cast<int>(n), directed);
    if (n < 2) return g;
    std::uniform_int_distribution<int> node(1, static_cast<int>(n));
    const std::size_t target = static_cast<std::size_t>(avg_degree * static_cast<double>(n));
    std::size_t placed = 0, tries = 0;
    while (placed < target && tries < 50 * target) {
        ++tries;
        const int i = node(rng), j = node(rng);
        if (i == j || g.has_edge(i, j)) continue;
        const double w = random_weight(rng);
        g.set_edge(i, j, w);
        if (!directed) g.set_edge(j, i, w);
        ++placed;
    }
    return g;
}

BenchResult bench_l2(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t repeats,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DynamicGraph g = random_graph(n, !kind.laplacian(), 4.0, seed);
    Vector b = random_vector(n, rng);
    L2State state = L2State::init(g, kind, b);

    std::vector<std::uint64_t> inc, scratch;
    for (std::size_t r = 0; r < repeats; ++r) {
        const GraphUpdate u = make_update(state.graph(), op, rng);
        std::optional<double> b_new;
        if (kind_of(u) == OpKind::NodeInsert) b_new = random_weight(rng);

        auto t0 = Clock::now();
        state.update(u, b_new);
        inc.push_back(elapsed_ns(t0));

        const DenseMatrix m = materialize(state.graph(), kind);
        t0 = Clock::now();
        const DenseMatrix mdag = oracle::pinv(m);
        Vector x(mdag.rows());
        kernels::matvec(mdag.rows(), mdag.cols(), mdag.data(), state.b().data(), x.data());
        scratch.push_back(elapsed_ns(t0));
    }
    return {"l2",    embedding_name(kind), op_kind_name(op), n, 0, repeats,
            median(inc), median(scratch)};
}

BenchResult bench_svd(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t rank_cap,
                      std::size_t repeats, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DynamicGraph g = random_graph(n, !kind.laplacian(), 4.0, seed);
    SvdState state = SvdState::from_scratch(materialize(g, kind), rank_cap);

    std::vector<std::uint64_t> inc, scratch;
    for (std::size_t r = 0; r < repeats; ++r) {
        const GraphUpdate u = make_update(g, op, rng);

        auto t0 = Clock::now();
        state.update_for_graph(g, u, kind);
        inc.push_back(elapsed_ns(t0));

        g = apply_update(g, u);
        const DenseMatrix m = materialize(g, kind);
        t0 = Clock::now();
        SvdState fresh = SvdState::from_scratch(m, rank_cap);
        scratch.push_back(elapsed_ns(t0));
        (void)fresh;
    }
    return {"svd",   embedding_name(kind), op_kind_name(op), n, rank_cap, repeats,
            median(inc), median(scratch)};
}

BenchResult bench_l1(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t repeats,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DynamicGraph g = random_graph(n, !kind.laplacian(), 4.0, seed);
    Vector b = random_vector(n, rng);
    L1State state = L1State::init(g, kind, b);

    std::vector<std::uint64_t> inc, scratch;
    for (std::size_t r = 0; r < repeats; ++r) {
        const GraphUpdate u = make_update(state.graph(), op, rng);

        auto t0 = Clock::now();
        state.update(u);
        inc.push_back(elapsed_ns(t0));

        const DenseMatrix m = materialize(state.graph(), kind);
        t0 = Clock::now();
        L1State fresh = L1State::solve(m, state.b());
        scratch.push_back(elapsed_ns(t0));
        (void)fresh;
    }
    return {"l1",    embedding_name(kind), op_kind_name(op), n, 0, repeats,
            median(inc), median(scratch)};
}

std::string csv_header() {
    return "mode,embedding,op,n,rank_cap,repeats,median_incremental_ns,median_scratch_ns,ratio";
}

std::string csv_row(const BenchResult& r) {
    std::ostringstream os;
    os << r.mode << ',' << r.embedding << ',' << r.op << ',' << r.n << ',' << r.rank_cap << ','
       << r.repeats << ',' << r.median_incremental_ns << ',' << r.median_scratch_ns << ','
       << r.ratio();
    return os.str();
}

}  // namespace dyngraph::bench
