#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately avoid the library's traversal/counting code paths.

#include <algorithm>
#include <optional>
#include <vector>

#include "deeptrace/epidemic.hpp"
#include "deeptrace/graph.hpp"
#include "deeptrace/rng.hpp"

namespace deeptrace::testing {

inline Graph path_graph(uint32_t n) {
    std::vector<Edge> edges;
    for (NodeId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return Graph::from_edges(n, edges);
}

inline Graph star_graph(uint32_t leaves) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
    return Graph::from_edges(leaves + 1, edges);
}

// Connected Erdos-Renyi-ish graph for property tests: random edges plus a
// random spanning backbone so connectivity never needs resampling.
inline Graph random_connected_graph(uint32_t n, double extra_edge_prob, Rng& rng) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        edges.emplace_back(v, static_cast<NodeId>(rng.bounded(v)));
    }
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.real() < extra_edge_prob) edges.emplace_back(u, v);
        }
    }
    return Graph::from_edges(n, edges);
}

// Uniform-ish random tree: each node attaches to a uniformly chosen earlier
// node.
inline Graph random_tree(uint32_t n, Rng& rng) {
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        edges.emplace_back(v, static_cast<NodeId>(rng.bounded(v)));
    }
    return Graph::from_edges(n, edges);
}

// Dense all-pairs shortest paths (Floyd-Warshall); the distance oracle.
inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
    const int kInf = 1 << 28;
    size_t n = g.node_count();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
    for (size_t v = 0; v < n; ++v) d[v][v] = 0;
    for (const auto& [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
    for (size_t k = 0; k < n; ++k) {
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) {
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
            }
        }
    }
    return d;
}

// Subtree sizes by repeated leaf stripping; the subtree_sizes oracle.
inline std::vector<uint32_t> leaf_strip_sizes(const Graph& g, NodeId root) {
    size_t n = g.node_count();
    std::vector<uint32_t> degree(n), size(n, 1);
    std::vector<uint8_t> removed(n, 0);
    for (NodeId v = 0; v < n; ++v) degree[v] = static_cast<uint32_t>(g.degree(v));
    for (size_t stripped = 0; stripped + 1 < n;) {
        for (NodeId v = 0; v < n; ++v) {
            if (!removed[v] && v != root && degree[v] == 1) {
                removed[v] = 1;
                ++stripped;
                for (NodeId w : g.neighbors(v)) {
                    if (!removed[w]) {
                        --degree[w];
                        size[w] += size[v];
                    }
                }
            }
        }
    }
    return size;
}

// Centroids by exhaustive removal; the centroid oracle.
inline std::vector<NodeId> exhaustive_centroid(const Graph& g) {
    size_t n = g.node_count();
    std::vector<NodeId> best;
    size_t best_value = n + 1;
    for (NodeId removed = 0; removed < n; ++removed) {
        std::vector<uint8_t> seen(n, 0);
        seen[removed] = 1;
        size_t worst = 0;
        for (NodeId s = 0; s < n; ++s) {
            if (seen[s]) continue;
            size_t count = 0;
            std::vector<NodeId> stack{s};
            seen[s] = 1;
            while (!stack.empty()) {
                NodeId x = stack.back();
                stack.pop_back();
                ++count;
                for (NodeId y : g.neighbors(x)) {
                    if (!seen[y]) {
                        seen[y] = 1;
                        stack.push_back(y);
                    }
                }
            }
            worst = std::max(worst, count);
        }
        if (worst < best_value) {
            best_value = worst;
            best = {removed};
        } else if (worst == best_value) {
            best.push_back(removed);
        }
    }
    return best;
}

// Recursive preorder with ascending neighbor exploration; the dfs oracle.
inline void preorder_oracle(const Graph& g, NodeId v, std::vector<uint8_t>& seen,
                            std::vector<NodeId>& out) {
    seen[v] = 1;
    out.push_back(v);
    for (NodeId w : g.neighbors(v)) {
        if (!seen[w]) preorder_oracle(g, w, seen, out);
    }
}

inline GraphPtr share(Graph g) { return std::make_shared<Graph>(std::move(g)); }

// Fully infected epidemic network over a base graph, infection order fixed to
// a provided permitted order (used by fixtures that pin the ground truth).
inline EpidemicNetwork full_epidemic(GraphPtr base, std::vector<NodeId> order) {
    EpidemicNetwork net;
    net.base = std::move(base);
    net.infected = std::move(order);
    net.induced = Subgraph(net.base, net.infected);
    net.config.stop_fraction = 1.0;
    return net;
}

}  // namespace deeptrace::testing
