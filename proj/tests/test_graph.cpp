#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "deeptrace/errors.hpp"
#include "deeptrace/graph.hpp"
#include "helpers.hpp"

using namespace deeptrace;
using namespace deeptrace::testing;

TEST_CASE("build_graph basics") {
    Graph path = Graph::from_edges(std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK(path.node_count() == 3);
    CHECK(path.degree(0) == 1);
    CHECK(path.degree(1) == 2);
    CHECK(path.degree(2) == 1);

    Graph dedup = Graph::from_edges(std::vector<Edge>{{0, 1}, {1, 0}});
    CHECK(dedup.edge_count() == 1);
    CHECK(dedup.degree(0) == 1);
    CHECK(dedup.degree(1) == 1);

    CHECK_THROWS_AS(Graph::from_edges(std::vector<Edge>{{0, 0}}), DataError);
    CHECK_THROWS_AS(Graph::from_edges(2, std::vector<Edge>{{0, 5}}), DataError);
}

TEST_CASE("degree sum equals twice edge count") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_connected_graph(3 + uint32_t(rng.bounded(40)), 0.1, rng);
        size_t total = 0;
        for (NodeId v = 0; v < g.node_count(); ++v) total += g.degree(v);
        CHECK(total == 2 * g.edge_count());
    }
}

TEST_CASE("bfs_tree on fixtures") {
    Graph star = star_graph(4);
    RootedTree t = bfs_tree(star, 0);
    CHECK(t.visit_order == std::vector<NodeId>{0, 1, 2, 3, 4});
    for (NodeId leaf = 1; leaf <= 4; ++leaf) CHECK(t.depth[leaf] == 1);

    Graph path = path_graph(3);
    CHECK(bfs_tree(path, 0).visit_order == std::vector<NodeId>{0, 1, 2});

    CHECK_THROWS_AS(bfs_tree(path, 9), DataError);
}

TEST_CASE("bfs_tree ties at equal depth break by ascending id") {
    // 0 - {3,5}; 3 - {7,9}; 5 - {1}. Depth-2 level must come out 1,7,9.
    Graph g = Graph::from_edges(std::vector<Edge>{{0, 3}, {0, 5}, {3, 7}, {3, 9}, {5, 1}});
    RootedTree t = bfs_tree(g, 0);
    CHECK(t.visit_order == std::vector<NodeId>{0, 3, 5, 1, 7, 9});
    CHECK(t.parent[1] == 5);
}

TEST_CASE("bfs depths equal shortest-path distances") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        Graph g = random_connected_graph(5 + uint32_t(rng.bounded(45)), 0.08, rng);
        auto oracle = floyd_warshall(g);
        NodeId root = static_cast<NodeId>(rng.bounded(g.node_count()));
        RootedTree t = bfs_tree(g, root);
        CHECK(t.visit_order.size() == g.node_count());
        for (NodeId v = 0; v < g.node_count(); ++v) {
            REQUIRE(t.depth[v] == uint32_t(oracle[root][v]));
        }
    }
}

TEST_CASE("dfs_tree on fixtures") {
    Graph path = path_graph(3);
    CHECK(dfs_tree(path, 1).visit_order == std::vector<NodeId>{1, 0, 2});

    Graph star = star_graph(3);
    CHECK(dfs_tree(star, 0).visit_order == std::vector<NodeId>{0, 1, 2, 3});

    CHECK_THROWS_AS(dfs_tree(star, 8), DataError);
}

TEST_CASE("dfs_tree matches recursive preorder") {
    // Full binary tree of depth 3 plus random graphs.
    std::vector<Edge> edges;
    for (NodeId v = 1; v < 15; ++v) edges.emplace_back((v - 1) / 2, v);
    Graph binary = Graph::from_edges(15, edges);
    std::vector<uint8_t> seen(15, 0);
    std::vector<NodeId> expected;
    preorder_oracle(binary, 0, seen, expected);
    CHECK(dfs_tree(binary, 0).visit_order == expected);

    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Graph g = random_connected_graph(4 + uint32_t(rng.bounded(30)), 0.1, rng);
        NodeId root = static_cast<NodeId>(rng.bounded(g.node_count()));
        std::vector<uint8_t> mark(g.node_count(), 0);
        std::vector<NodeId> oracle;
        preorder_oracle(g, root, mark, oracle);
        CHECK(dfs_tree(g, root).visit_order == oracle);
    }
}

TEST_CASE("traversal orders are permutations of the component") {
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        Graph g = random_connected_graph(4 + uint32_t(rng.bounded(30)), 0.1, rng);
        for (auto order : {bfs_tree(g, 0).visit_order, dfs_tree(g, 0).visit_order}) {
            std::sort(order.begin(), order.end());
            std::vector<NodeId> all(g.node_count());
            std::iota(all.begin(), all.end(), 0);
            CHECK(order == all);
        }
    }
}

TEST_CASE("distance") {
    Graph path = path_graph(3);
    CHECK(distance(path, 0, 2) == 2);
    CHECK(distance(path, 1, 1) == 0);

    Graph two = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {2, 3}});
    CHECK_FALSE(distance(two, 0, 3).has_value());

    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_connected_graph(5 + uint32_t(rng.bounded(45)), 0.08, rng);
        auto oracle = floyd_warshall(g);
        for (int probe = 0; probe < 10; ++probe) {
            NodeId u = static_cast<NodeId>(rng.bounded(g.node_count()));
            NodeId v = static_cast<NodeId>(rng.bounded(g.node_count()));
            CHECK(distance(g, u, v) == uint32_t(oracle[u][v]));
        }
    }
}

TEST_CASE("diameter") {
    CHECK(diameter(path_graph(7)) == 6);
    CHECK(diameter(star_graph(5)) == 2);
    CHECK_THROWS_AS(diameter(Graph::from_edges(4, std::vector<Edge>{{0, 1}, {2, 3}})), DataError);

    Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_connected_graph(5 + uint32_t(rng.bounded(45)), 0.08, rng);
        auto oracle = floyd_warshall(g);
        int expected = 0;
        for (size_t i = 0; i < g.node_count(); ++i) {
            for (size_t j = 0; j < g.node_count(); ++j) expected = std::max(expected, oracle[i][j]);
        }
        CHECK(diameter(g) == uint32_t(expected));
    }
}

TEST_CASE("subtree_sizes") {
    Graph path = path_graph(5);
    auto sizes = subtree_sizes(bfs_tree(path, 0));
    CHECK(sizes == std::vector<uint32_t>{5, 4, 3, 2, 1});

    Graph star = star_graph(4);
    auto star_sizes = subtree_sizes(bfs_tree(star, 0));
    CHECK(star_sizes == std::vector<uint32_t>{5, 1, 1, 1, 1});

    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Graph tree = random_tree(3 + uint32_t(rng.bounded(10)), rng);
        NodeId root = static_cast<NodeId>(rng.bounded(tree.node_count()));
        CHECK(subtree_sizes(bfs_tree(tree, root)) == leaf_strip_sizes(tree, root));
    }
}

TEST_CASE("centroid") {
    CHECK(centroid(path_graph(5)) == std::vector<NodeId>{2});
    CHECK(centroid(path_graph(4)) == std::vector<NodeId>{1, 2});

    Graph cycle = Graph::from_edges(std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}});
    CHECK_THROWS_AS(centroid(cycle), DataError);

    Rng rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        Graph tree = random_tree(2 + uint32_t(rng.bounded(11)), rng);
        auto got = centroid(tree);
        CHECK(got == exhaustive_centroid(tree));
        CHECK(got.size() >= 1);
        CHECK(got.size() <= 2);
        if (got.size() == 2) CHECK(tree.has_edge(got[0], got[1]));
    }
}

TEST_CASE("centroid max component is at most n/2") {
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        uint32_t n = 2 + uint32_t(rng.bounded(40));
        Graph tree = random_tree(n, rng);
        for (NodeId c : centroid(tree)) {
            RootedTree t = bfs_tree(tree, c);
            auto sizes = subtree_sizes(t);
            for (NodeId v : tree.neighbors(c)) {
                CHECK(sizes[v] <= n / 2);
            }
        }
    }
}

TEST_CASE("subgraph views") {
    Graph g = Graph::from_edges(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}});
    Subgraph view(share(g), {0, 1, 3});
    CHECK(view.size() == 3);
    CHECK(view.contains(1));
    CHECK_FALSE(view.contains(2));
    CHECK(view.degree_in(0) == 2);
    CHECK(view.edge_count() == 3);
    CHECK_FALSE(view.is_tree());  // triangle 0-1-3

    Subgraph tree_view(share(g), {0, 1, 2});
    CHECK(tree_view.is_tree());

    auto [materialized, mapping] = view.materialize();
    CHECK(materialized.node_count() == 3);
    CHECK(materialized.edge_count() == 3);
    CHECK(mapping == std::vector<NodeId>{0, 1, 3});
}
