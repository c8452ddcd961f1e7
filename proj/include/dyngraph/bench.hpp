#pragma once

#include <cstdint>
#include <string>

#include "dyngraph/embedding.hpp"
#include "dyngraph/graph.hpp"

// Incremental-vs-scratch timing harness. The CLI `bench` subcommand and the
// acceptance suite share these drivers so the measured quantities stay
// identical: incremental = one engine update, scratch = the from-scratch
// oracle recompute of the same quantity.

namespace dyngraph::bench {

struct BenchResult {
    std::string mode;
    std::string embedding;
    std::string op;
    std::size_t n = 0;
    std::size_t rank_cap = 0;
    std::size_t repeats = 0;
    std::uint64_t median_incremental_ns = 0;
    std::uint64_t median_scratch_ns = 0;
    double ratio() const {
        return median_scratch_ns == 0
                   ? 0.0
                   : static_cast<double>(median_incremental_ns) /
                         static_cast<double>(median_scratch_ns);
    }
};

/// Seed-deterministic weighted graph with roughly `avg_degree * n` edges.
DynamicGraph random_graph(std::size_t n, bool directed, double avg_degree, std::uint64_t seed);

BenchResult bench_l2(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t repeats,
                     std::uint64_t seed);
BenchResult bench_svd(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t rank_cap,
                      std::size_t repeats, std::uint64_t seed);
BenchResult bench_l1(std::size_t n, OpKind op, const EmbeddingKind& kind, std::size_t repeats,
                     std::uint64_t seed);

std::string csv_header();
std::string csv_row(const BenchResult& r);

}  // namespace dyngraph::bench
