#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "dyngraph/graph.hpp"
#include "test_util.hpp"

using namespace dyngraph;

TEST_CASE("node insert into an empty graph") {
    DynamicGraph g(0, true);
    DynamicGraph g1 = apply_update(g, NodeInsert{});
    CHECK(g1.node_count() == 1);
    CHECK(g1.weights().empty());
}

TEST_CASE("deleting a node removes its incident edges and compacts ids") {
    DynamicGraph g(3, true);
    g.set_edge(1, 2, 1.0);
    g.set_edge(1, 3, 1.0);
    g.set_edge(3, 2, 1.0);
    DynamicGraph g1 = apply_update(g, NodeDelete{3});
    CHECK(g1.node_count() == 2);
    CHECK(g1.weights().size() == 1);
    CHECK(g1.weight(1, 2) == 1.0);
    g1.validate();
}

TEST_CASE("duplicate edge insert conflicts") {
    DynamicGraph g(2, true);
    g.set_edge(1, 2, 1.0);
    CHECK_THROWS_AS(apply_update(g, EdgeInsert{1, 2, 2.0}), UpdateConflict);
}

TEST_CASE("edge update validation errors") {
    DynamicGraph g(3, false);
    CHECK_THROWS_AS(apply_update(g, EdgeDelete{1, 2}), UpdateConflict);
    CHECK_THROWS_AS(apply_update(g, WeightChange{1, 2, 1.0}), UpdateConflict);
    CHECK_THROWS_AS(apply_update(g, EdgeInsert{1, 2, 0.0}), InvalidWeight);
    CHECK_THROWS_AS(apply_update(g, EdgeInsert{0, 2, 1.0}), UpdateConflict);
    CHECK_THROWS_AS(apply_update(g, NodeDelete{4}), UpdateConflict);
}

TEST_CASE("permute with last node is the identity") {
    DynamicGraph g(3, false);
    g.set_edge(1, 2, 2.0);
    g.set_edge(2, 1, 2.0);
    auto [p, tau] = permute_with_last(g, 3);
    CHECK(tau.identity());
    CHECK(p.weights() == g.weights());
}

TEST_CASE("permuting the first node of a path relabels its edges") {
    // path 1-2-3, permute node 1 with node 3
    DynamicGraph g(3, false);
    g.set_edge(1, 2, 1.0);
    g.set_edge(2, 1, 1.0);
    g.set_edge(2, 3, 1.0);
    g.set_edge(3, 2, 1.0);
    auto [p, tau] = permute_with_last(g, 1);
    CHECK(tau.a == 1);
    CHECK(tau.b == 3);
    CHECK(p.has_edge(3, 2));
    CHECK(p.has_edge(2, 1));
    CHECK_FALSE(p.has_edge(1, 2) != p.has_edge(2, 1));
    p.validate();

    auto [back, tau2] = permute_with_last(p, 1);
    CHECK(back.weights() == g.weights());
}

TEST_CASE("insert then delete restores the edge map") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        DynamicGraph g = testutil::random_graph(6, trial % 2 == 0, 0.3, rng);
        if (g.has_edge(1, 2)) continue;
        const auto before = g.weights();
        DynamicGraph g1 = apply_update(g, EdgeInsert{1, 2, 7.0});
        DynamicGraph g2 = apply_update(g1, EdgeDelete{1, 2});
        CHECK(g2.weights() == before);
    }
}

TEST_CASE("graph invariants hold after random update sequences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        DynamicGraph g = testutil::random_graph(8, trial % 2 == 0, 0.25, rng);
        for (int step = 0; step < 40; ++step) {
            const GraphUpdate u = testutil::random_update(g, rng);
            g = apply_update(g, u);
            g.validate();
        }
    }
}

TEST_CASE("directed self-loops are allowed, undirected rejected at laplacian level only") {
    DynamicGraph g(2, true);
    DynamicGraph g1 = apply_update(g, EdgeInsert{1, 1, 3.0});
    CHECK(g1.weight(1, 1) == 3.0);
    g1.validate();
}

TEST_CASE("graph text format round-trips") {
    DynamicGraph g(4, false);
    g.set_edge(1, 2, 0.5);
    g.set_edge(2, 1, 0.5);
    g.set_edge(3, 4, -2.25);
    g.set_edge(4, 3, -2.25);

    std::stringstream ss;
    write_graph(ss, g);
    DynamicGraph back = read_graph(ss);
    CHECK(back.node_count() == 4);
    CHECK(back.directed() == false);
    CHECK(back.weights() == g.weights());
}

TEST_CASE("graph parser reports malformed input") {
    auto parse = [](const std::string& text) {
        std::stringstream ss(text);
        return read_graph(ss);
    };
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("graph 2 sideways\n"), ParseError);
    CHECK_THROWS_AS(parse("graph 2 directed\nedge 1 2 0\n"), ParseError);
    CHECK_THROWS_AS(parse("graph 2 directed\nedge 1 3 1\n"), ParseError);
    CHECK_THROWS_AS(parse("graph 2 directed\nedge 1 2 1\nedge 1 2 2\n"), ParseError);
    CHECK_NOTHROW(parse("# comment\ngraph 2 directed\n# another\nedge 1 2 1\n"));
}

TEST_CASE("operation stream format round-trips") {
    const std::string text =
        "ei 1 2 0.5\n"
        "ed 2 3\n"
        "wc 1 2 -1.25\n"
        "ni 2 1 0.5 -3 0.75\n"
        "nd 4\n";
    std::stringstream ss(text);
    const auto ops = read_ops(ss);
    REQUIRE(ops.size() == 5);
    CHECK(kind_of(ops[0]) == OpKind::EdgeInsert);
    CHECK(kind_of(ops[1]) == OpKind::EdgeDelete);
    CHECK(kind_of(ops[2]) == OpKind::WeightChange);
    CHECK(kind_of(ops[3]) == OpKind::NodeInsert);
    CHECK(kind_of(ops[4]) == OpKind::NodeDelete);

    const auto& ni = std::get<NodeInsert>(ops[3]);
    REQUIRE(ni.edges.size() == 2);
    CHECK(ni.edges[0].node == 1);
    CHECK_FALSE(ni.edges[0].incoming);
    CHECK(ni.edges[1].node == 3);
    CHECK(ni.edges[1].incoming);

    for (const auto& op : ops) {
        std::stringstream one(format_op(op));
        const auto again = read_ops(one);
        REQUIRE(again.size() == 1);
        CHECK(format_op(again[0]) == format_op(op));
    }
}

TEST_CASE("ops parser reports malformed input") {
    auto parse = [](const std::string& text) {
        std::stringstream ss(text);
        return read_ops(ss);
    };
    CHECK_THROWS_AS(parse("zz 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse("ei 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse("ni 2 1 0.5\n"), ParseError);
}
