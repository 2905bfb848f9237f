#include "deeptrace/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

#include "deeptrace/errors.hpp"

namespace deeptrace {

Graph Graph::from_edges(size_t node_count, std::span<const Edge> edges) {
    std::vector<Edge> normalized;
    normalized.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u == v) {
            throw DataError("self-loop on node " + std::to_string(u));
        }
        if (u >= node_count || v >= node_count) {
            throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") references node outside [0," + std::to_string(node_count) + ")");
        }
        normalized.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());

    Graph g;
    g.offsets_.assign(node_count + 1, 0);
    for (const auto& [u, v] : normalized) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.adjacency_.resize(normalized.size() * 2);
    std::vector<uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : normalized) {
        g.adjacency_[cursor[u]++] = v;
        g.adjacency_[cursor[v]++] = u;
    }
    for (size_t v = 0; v < node_count; ++v) {
        auto row = g.adjacency_.begin();
        std::sort(row + g.offsets_[v], row + g.offsets_[v + 1]);
    }
    return g;
}

Graph Graph::from_edges(std::span<const Edge> edges) {
    NodeId max_id = 0;
    for (const auto& [u, v] : edges) max_id = std::max({max_id, u, v});
    return from_edges(edges.empty() ? 0 : size_t(max_id) + 1, edges);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

static void require_node(const Graph& g, NodeId v, const char* what) {
    if (!g.contains(v)) {
        throw DataError(std::string(what) + ": node " + std::to_string(v) +
                        " not in graph of size " + std::to_string(g.node_count()));
    }
}

RootedTree bfs_tree(const Graph& g, NodeId root) {
    require_node(g, root, "bfs_tree");
    RootedTree t;
    t.root = root;
    t.parent.assign(g.node_count(), kNoNode);
    t.depth.assign(g.node_count(), RootedTree::kUnreached);
    t.depth[root] = 0;
    t.visit_order.push_back(root);

    // Levels are expanded in ascending-id order, so a node's recorded parent
    // is its lowest-id neighbor in the previous level.
    std::vector<NodeId> level{root};
    while (!level.empty()) {
        std::vector<NodeId> next;
        for (NodeId u : level) {
            for (NodeId v : g.neighbors(u)) {
                if (t.depth[v] == RootedTree::kUnreached) {
                    t.depth[v] = t.depth[u] + 1;
                    t.parent[v] = u;
                    next.push_back(v);
                }
            }
        }
        std::sort(next.begin(), next.end());
        t.visit_order.insert(t.visit_order.end(), next.begin(), next.end());
        level = std::move(next);
    }
    return t;
}

RootedTree dfs_tree(const Graph& g, NodeId root) {
    require_node(g, root, "dfs_tree");
    RootedTree t;
    t.root = root;
    t.parent.assign(g.node_count(), kNoNode);
    t.depth.assign(g.node_count(), RootedTree::kUnreached);
    t.depth[root] = 0;
    t.visit_order.push_back(root);

    // Iterative preorder; adjacency is sorted so branches are exhausted
    // lowest-NodeId-first.
    std::vector<std::pair<NodeId, uint32_t>> stack;
    stack.reserve(g.node_count());
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        NodeId u = stack.back().first;
        auto row = g.neighbors(u);
        NodeId child = kNoNode;
        {
            uint32_t& cursor = stack.back().second;
            while (cursor < row.size()) {
                NodeId v = row[cursor++];
                if (t.depth[v] == RootedTree::kUnreached) {
                    child = v;
                    break;
                }
            }
        }
        if (child == kNoNode) {
            stack.pop_back();
            continue;
        }
        t.depth[child] = t.depth[u] + 1;
        t.parent[child] = u;
        t.visit_order.push_back(child);
        stack.emplace_back(child, 0);
    }
    return t;
}

std::optional<uint32_t> distance(const Graph& g, NodeId u, NodeId v) {
    require_node(g, u, "distance");
    require_node(g, v, "distance");
    if (u == v) return 0;
    std::vector<uint32_t> dist(g.node_count(), RootedTree::kUnreached);
    dist[u] = 0;
    std::queue<NodeId> queue;
    queue.push(u);
    while (!queue.empty()) {
        NodeId x = queue.front();
        queue.pop();
        for (NodeId y : g.neighbors(x)) {
            if (dist[y] == RootedTree::kUnreached) {
                dist[y] = dist[x] + 1;
                if (y == v) return dist[y];
                queue.push(y);
            }
        }
    }
    return std::nullopt;
}

uint32_t diameter(const Graph& g) {
    if (g.node_count() == 0) throw DataError("diameter: empty graph");
    uint32_t best = 0;
    std::vector<uint32_t> dist(g.node_count());
    for (NodeId s = 0; s < g.node_count(); ++s) {
        std::fill(dist.begin(), dist.end(), RootedTree::kUnreached);
        dist[s] = 0;
        size_t seen = 1;
        std::queue<NodeId> queue;
        queue.push(s);
        while (!queue.empty()) {
            NodeId x = queue.front();
            queue.pop();
            for (NodeId y : g.neighbors(x)) {
                if (dist[y] == RootedTree::kUnreached) {
                    dist[y] = dist[x] + 1;
                    best = std::max(best, dist[y]);
                    ++seen;
                    queue.push(y);
                }
            }
        }
        if (seen != g.node_count()) throw DataError("diameter: graph is disconnected");
    }
    return best;
}

std::vector<uint32_t> subtree_sizes(const RootedTree& t) {
    std::vector<uint32_t> size(t.parent.size(), 0);
    for (NodeId v : t.visit_order) size[v] = 1;
    for (auto it = t.visit_order.rbegin(); it != t.visit_order.rend(); ++it) {
        NodeId v = *it;
        if (t.parent[v] != kNoNode) size[t.parent[v]] += size[v];
    }
    return size;
}

std::vector<NodeId> centroid(const Graph& g) {
    size_t n = g.node_count();
    if (n == 0) throw DataError("centroid: empty graph");
    if (g.edge_count() != n - 1 || !is_connected(g)) {
        throw DataError("centroid: input is not a tree");
    }
    RootedTree t = bfs_tree(g, 0);
    std::vector<uint32_t> size = subtree_sizes(t);
    std::vector<NodeId> best;
    size_t best_value = n;
    for (NodeId v = 0; v < n; ++v) {
        size_t worst = n - size[v];
        for (NodeId u : g.neighbors(v)) {
            if (t.parent[u] == v) worst = std::max<size_t>(worst, size[u]);
        }
        if (worst < best_value) {
            best_value = worst;
            best = {v};
        } else if (worst == best_value) {
            best.push_back(v);
        }
    }
    std::sort(best.begin(), best.end());
    return best;
}

bool is_connected(const Graph& g) {
    if (g.node_count() == 0) return true;
    return bfs_tree(g, 0).visit_order.size() == g.node_count();
}

std::vector<NodeId> giant_component(const Graph& g) {
    std::vector<uint8_t> seen(g.node_count(), 0);
    std::vector<NodeId> best;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        if (seen[s]) continue;
        std::vector<NodeId> comp{s};
        seen[s] = 1;
        std::queue<NodeId> queue;
        queue.push(s);
        while (!queue.empty()) {
            NodeId x = queue.front();
            queue.pop();
            for (NodeId y : g.neighbors(x)) {
                if (!seen[y]) {
                    seen[y] = 1;
                    comp.push_back(y);
                    queue.push(y);
                }
            }
        }
        if (comp.size() > best.size()) best = std::move(comp);
    }
    std::sort(best.begin(), best.end());
    return best;
}

Subgraph::Subgraph(GraphPtr base, std::vector<NodeId> nodes) : base_(std::move(base)) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    nodes_ = std::move(nodes);

    size_t n = base_->node_count();
    membership_.assign(n, 0);
    position_.assign(n, kNoIndex);
    for (uint32_t i = 0; i < nodes_.size(); ++i) {
        if (!base_->contains(nodes_[i])) {
            throw DataError("subgraph node " + std::to_string(nodes_[i]) + " not in base graph");
        }
        membership_[nodes_[i]] = 1;
        position_[nodes_[i]] = i;
    }

    offsets_.assign(nodes_.size() + 1, 0);
    for (uint32_t i = 0; i < nodes_.size(); ++i) {
        for (NodeId w : base_->neighbors(nodes_[i])) {
            if (membership_[w]) ++offsets_[i + 1];
        }
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    induced_.resize(offsets_.back());
    for (uint32_t i = 0; i < nodes_.size(); ++i) {
        uint32_t cursor = offsets_[i];
        for (NodeId w : base_->neighbors(nodes_[i])) {
            if (membership_[w]) induced_[cursor++] = w;
        }
    }
}

Subgraph Subgraph::whole(GraphPtr base) {
    std::vector<NodeId> all(base->node_count());
    std::iota(all.begin(), all.end(), 0);
    return Subgraph(std::move(base), std::move(all));
}

bool Subgraph::is_tree() const {
    return size() > 0 && edge_count() == size() - 1 && is_connected_view();
}

bool Subgraph::is_connected_view() const {
    if (nodes_.empty()) return false;
    std::vector<uint8_t> seen(base_->node_count(), 0);
    std::vector<NodeId> stack{nodes_[0]};
    seen[nodes_[0]] = 1;
    size_t count = 0;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        ++count;
        for (NodeId w : neighbors_in(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return count == nodes_.size();
}

std::pair<Graph, std::vector<NodeId>> Subgraph::materialize() const {
    std::vector<Edge> edges;
    edges.reserve(edge_count());
    for (NodeId v : nodes_) {
        for (NodeId w : neighbors_in(v)) {
            if (v < w) edges.emplace_back(index_of(v), index_of(w));
        }
    }
    return {Graph::from_edges(nodes_.size(), edges), nodes_};
}

}  // namespace deeptrace
