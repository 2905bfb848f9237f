#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace deeptrace {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph over dense node ids [0, n). Immutable after
/// construction; adjacency lists are sorted ascending. Shareable across
/// threads without synchronization.
class Graph {
public:
    Graph() = default;

    /// Builds from an edge list. Reversed duplicates are merged; self-loops
    /// are rejected. node_count fixes n explicitly (allows isolated nodes);
    /// the edge-only overload infers n = max id + 1.
    static Graph from_edges(size_t node_count, std::span<const Edge> edges);
    static Graph from_edges(std::span<const Edge> edges);

    size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    size_t edge_count() const { return adjacency_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    bool has_edge(NodeId u, NodeId v) const;
    bool contains(NodeId v) const { return v < node_count(); }

    std::vector<Edge> edges() const;

private:
    std::vector<uint32_t> offsets_;  // size n+1
    std::vector<NodeId> adjacency_;  // flat, per-node sorted
};

using GraphPtr = std::shared_ptr<const Graph>;

/// Spanning tree of one traversal. visit_order lists reachable nodes in
/// traversal order; parent is kNoNode for the root and unreachable nodes.
struct RootedTree {
    NodeId root = kNoNode;
    std::vector<NodeId> parent;    // indexed by NodeId
    std::vector<uint32_t> depth;   // hops from root; kUnreached if unreachable
    std::vector<NodeId> visit_order;

    static constexpr uint32_t kUnreached = std::numeric_limits<uint32_t>::max();
};

/// BFS spanning tree. Nodes at equal depth are visited in ascending NodeId
/// order and adopt their lowest-id parent from the previous level, so the
/// traversal (and everything derived from it) is reproducible.
RootedTree bfs_tree(const Graph& g, NodeId root);

/// DFS (preorder) spanning tree, exploring neighbors lowest-NodeId-first.
RootedTree dfs_tree(const Graph& g, NodeId root);

/// Shortest-path hop count; nullopt when u and v are disconnected.
std::optional<uint32_t> distance(const Graph& g, NodeId u, NodeId v);

/// Max pairwise distance. Throws DataError on disconnected input.
uint32_t diameter(const Graph& g);

/// size(v) = 1 + sum of children sizes, over the tree's reachable nodes.
std::vector<uint32_t> subtree_sizes(const RootedTree& t);

/// Centroid(s) of a tree: the 1 or 2 (adjacent) nodes minimizing the largest
/// component left by their removal. Throws DataError if g is not a tree.
std::vector<NodeId> centroid(const Graph& g);

bool is_connected(const Graph& g);

/// Nodes of the largest connected component, ascending.
std::vector<NodeId> giant_component(const Graph& g);

/// Immutable node-set view over a parent graph: the growth representation
/// for tracing subgraphs. Caches the induced adjacency (base ids, sorted).
class Subgraph {
public:
    Subgraph() = default;
    Subgraph(GraphPtr base, std::vector<NodeId> nodes);

    static Subgraph whole(GraphPtr base);

    const Graph& base() const { return *base_; }
    const GraphPtr& base_ptr() const { return base_; }
    std::span<const NodeId> nodes() const { return nodes_; }
    size_t size() const { return nodes_.size(); }
    bool contains(NodeId v) const {
        return v < membership_.size() && membership_[v] != 0;
    }
    /// Position of v within nodes(); kNoIndex if absent.
    uint32_t index_of(NodeId v) const {
        return v < position_.size() ? position_[v] : kNoIndex;
    }

    std::span<const NodeId> neighbors_in(NodeId v) const {
        uint32_t i = index_of(v);
        return {induced_.data() + offsets_[i], induced_.data() + offsets_[i + 1]};
    }
    size_t degree_in(NodeId v) const {
        uint32_t i = index_of(v);
        return offsets_[i + 1] - offsets_[i];
    }

    size_t edge_count() const { return induced_.size() / 2; }
    bool is_tree() const;
    bool is_connected_view() const;

    /// Induced subgraph as a standalone Graph with nodes renumbered to
    /// [0, size); mapping[i] = original NodeId of new node i.
    std::pair<Graph, std::vector<NodeId>> materialize() const;

    static constexpr uint32_t kNoIndex = std::numeric_limits<uint32_t>::max();

private:
    GraphPtr base_;
    std::vector<NodeId> nodes_;      // sorted ascending
    std::vector<uint8_t> membership_;
    std::vector<uint32_t> position_;
    std::vector<uint32_t> offsets_;  // size nodes_.size()+1
    std::vector<NodeId> induced_;    // induced adjacency, base ids
};

}  // namespace deeptrace
