#include "deeptrace/epidemic.hpp"

#include <algorithm>
#include <cmath>

#include "deeptrace/errors.hpp"

namespace deeptrace {

std::string family_name(GraphFamily family) {
    switch (family) {
        case GraphFamily::kErdosRenyi: return "erdos-renyi";
        case GraphFamily::kBarabasiAlbert: return "barabasi-albert";
        case GraphFamily::kWattsStrogatz: return "watts-strogatz";
        case GraphFamily::kRandomRegularTree: return "random-regular-tree";
        case GraphFamily::kCompleteNaryTree: return "complete-nary-tree";
        case GraphFamily::kRandomTree: return "random-tree";
    }
    throw DataError("unknown graph family");
}

GraphFamily family_from_name(const std::string& name) {
    if (name == "erdos-renyi") return GraphFamily::kErdosRenyi;
    if (name == "barabasi-albert") return GraphFamily::kBarabasiAlbert;
    if (name == "watts-strogatz") return GraphFamily::kWattsStrogatz;
    if (name == "random-regular-tree") return GraphFamily::kRandomRegularTree;
    if (name == "complete-nary-tree") return GraphFamily::kCompleteNaryTree;
    if (name == "random-tree") return GraphFamily::kRandomTree;
    throw DataError("unknown graph family: " + name);
}

static Graph erdos_renyi(uint32_t n, double p, Rng& rng) {
    if (n == 0 || p < 0.0 || p > 1.0) throw DataError("erdos-renyi: invalid parameters");
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.real() < p) edges.emplace_back(u, v);
        }
    }
    return Graph::from_edges(n, edges);
}

static Graph barabasi_albert(uint32_t n, uint32_t m, Rng& rng) {
    if (m == 0 || n <= m) throw DataError("barabasi-albert: need size > attach_count >= 1");
    std::vector<Edge> edges;
    // Attachment targets drawn degree-proportionally from the endpoint pool.
    std::vector<NodeId> endpoint_pool;
    for (NodeId v = 1; v <= m; ++v) {
        edges.emplace_back(0, v);
        endpoint_pool.push_back(0);
        endpoint_pool.push_back(v);
    }
    for (NodeId v = m + 1; v < n; ++v) {
        std::vector<NodeId> targets;
        while (targets.size() < m) {
            NodeId candidate = endpoint_pool[rng.bounded(endpoint_pool.size())];
            if (std::find(targets.begin(), targets.end(), candidate) == targets.end()) {
                targets.push_back(candidate);
            }
        }
        for (NodeId t : targets) {
            edges.emplace_back(v, t);
            endpoint_pool.push_back(v);
            endpoint_pool.push_back(t);
        }
    }
    return Graph::from_edges(n, edges);
}

static Graph watts_strogatz(uint32_t n, uint32_t k, double beta, Rng& rng) {
    if (k == 0 || k % 2 != 0 || k >= n) throw DataError("watts-strogatz: ring_degree must be even and < size");
    if (beta < 0.0 || beta > 1.0) throw DataError("watts-strogatz: rewire_probability outside [0,1]");
    std::vector<std::vector<NodeId>> adj(n);
    auto connected = [&](NodeId u, NodeId v) {
        return std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end();
    };
    auto link = [&](NodeId u, NodeId v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    };
    for (NodeId u = 0; u < n; ++u) {
        for (uint32_t j = 1; j <= k / 2; ++j) link(u, (u + j) % n);
    }
    // Rewire the far endpoint of each original lattice edge with prob beta.
    for (NodeId u = 0; u < n; ++u) {
        for (uint32_t j = 1; j <= k / 2; ++j) {
            NodeId v = (u + j) % n;
            if (rng.real() >= beta) continue;
            if (adj[u].size() >= n - 1) continue;  // u already saturated
            NodeId w;
            do {
                w = static_cast<NodeId>(rng.bounded(n));
            } while (w == u || connected(u, w));
            adj[u].erase(std::find(adj[u].begin(), adj[u].end(), v));
            adj[v].erase(std::find(adj[v].begin(), adj[v].end(), u));
            link(u, w);
        }
    }
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : adj[u]) {
            if (u < v) edges.emplace_back(u, v);
        }
    }
    return Graph::from_edges(n, edges);
}

// Tree in which every internal node has degree exactly `degree`. Grown by
// expanding a uniformly chosen leaf with (degree-1) children, degree children
// for the root, so only sizes 1 and degree+1+2k (k>=0) are reachable.
static Graph random_regular_tree(uint32_t n, uint32_t degree, Rng& rng) {
    if (degree < 2) throw DataError("random-regular-tree: degree must be >= 2");
    if (n != 1 && (n < degree + 1 || (n - degree - 1) % (degree - 1) != 0)) {
        throw DataError("random-regular-tree: size " + std::to_string(n) +
                        " unreachable with internal degree " + std::to_string(degree));
    }
    std::vector<Edge> edges;
    if (n == 1) return Graph::from_edges(1, edges);
    std::vector<NodeId> leaves;
    NodeId next = 1;
    for (uint32_t c = 0; c < degree; ++c) {
        edges.emplace_back(0, next);
        leaves.push_back(next++);
    }
    while (next < n) {
        size_t pick = rng.bounded(leaves.size());
        NodeId grow = leaves[pick];
        leaves.erase(leaves.begin() + pick);
        for (uint32_t c = 0; c + 1 < degree; ++c) {
            edges.emplace_back(grow, next);
            leaves.push_back(next++);
        }
    }
    return Graph::from_edges(n, edges);
}

static Graph complete_nary_tree(uint32_t n, uint32_t arity) {
    if (arity == 0) throw DataError("complete-nary-tree: arity must be >= 1");
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) edges.emplace_back((v - 1) / arity, v);
    return Graph::from_edges(n, edges);
}

// Uniform labeled tree via a random Pruefer sequence.
static Graph random_tree(uint32_t n, Rng& rng) {
    if (n == 0) throw DataError("random-tree: empty size");
    std::vector<Edge> edges;
    if (n == 1) return Graph::from_edges(1, edges);
    if (n == 2) {
        edges.emplace_back(0, 1);
        return Graph::from_edges(2, edges);
    }
    std::vector<NodeId> pruefer(n - 2);
    for (auto& x : pruefer) x = static_cast<NodeId>(rng.bounded(n));
    std::vector<uint32_t> degree(n, 1);
    for (NodeId x : pruefer) ++degree[x];
    std::vector<NodeId> leaves;
    for (NodeId v = 0; v < n; ++v) {
        if (degree[v] == 1) leaves.push_back(v);
    }
    std::make_heap(leaves.begin(), leaves.end(), std::greater<>());
    for (NodeId x : pruefer) {
        std::pop_heap(leaves.begin(), leaves.end(), std::greater<>());
        NodeId leaf = leaves.back();
        leaves.pop_back();
        edges.emplace_back(leaf, x);
        if (--degree[x] == 1) {
            leaves.push_back(x);
            std::push_heap(leaves.begin(), leaves.end(), std::greater<>());
        }
    }
    std::pop_heap(leaves.begin(), leaves.end(), std::greater<>());
    NodeId a = leaves.back();
    leaves.pop_back();
    edges.emplace_back(a, leaves.front());
    return Graph::from_edges(n, edges);
}

static Graph generate_once(const GeneratorSpec& spec, uint64_t seed) {
    Rng rng(seed);
    switch (spec.family) {
        case GraphFamily::kErdosRenyi:
            return erdos_renyi(spec.size, spec.edge_probability, rng);
        case GraphFamily::kBarabasiAlbert:
            return barabasi_albert(spec.size, spec.attach_count, rng);
        case GraphFamily::kWattsStrogatz:
            return watts_strogatz(spec.size, spec.ring_degree, spec.rewire_probability, rng);
        case GraphFamily::kRandomRegularTree:
            return random_regular_tree(spec.size, spec.regular_degree, rng);
        case GraphFamily::kCompleteNaryTree:
            return complete_nary_tree(spec.size, spec.arity);
        case GraphFamily::kRandomTree:
            return random_tree(spec.size, rng);
    }
    throw DataError("unknown graph family");
}

Generated generate(const GeneratorSpec& spec) {
    if (spec.size == 0) throw DataError("generate: size must be positive");
    Generated out;
    uint64_t stream = derive_seed(spec.seed, family_name(spec.family));
    for (uint32_t attempt = 0; attempt < 100; ++attempt) {
        Graph g = generate_once(spec, derive_seed(stream, attempt));
        out.attempts = attempt + 1;
        if (is_connected(g) && g.node_count() == spec.size) {
            out.graph = std::make_shared<Graph>(std::move(g));
            return out;
        }
        if (attempt == 99) {
            // Keep the giant component, renumbered densely.
            std::vector<NodeId> keep = giant_component(g);
            std::vector<uint32_t> remap(g.node_count(), 0);
            for (uint32_t i = 0; i < keep.size(); ++i) remap[keep[i]] = i;
            std::vector<uint8_t> in(g.node_count(), 0);
            for (NodeId v : keep) in[v] = 1;
            std::vector<Edge> edges;
            for (NodeId u : keep) {
                for (NodeId v : g.neighbors(u)) {
                    if (in[v] && u < v) edges.emplace_back(remap[u], remap[v]);
                }
            }
            out.graph = std::make_shared<Graph>(Graph::from_edges(keep.size(), edges));
            out.attempts = 100;
            out.giant_component_taken = true;
            return out;
        }
    }
    throw DataError("generate: unreachable");
}

EpidemicNetwork simulate_si(GraphPtr g, NodeId source, const SiConfig& cfg) {
    if (!g || !g->contains(source)) throw DataError("simulate_si: source not in graph");
    if (cfg.stop_fraction <= 0.0 || cfg.stop_fraction > 1.0) {
        throw DataError("simulate_si: stop_fraction outside (0,1]");
    }
    size_t target = static_cast<size_t>(std::ceil(cfg.stop_fraction * double(g->node_count())));
    target = std::max<size_t>(target, 1);

    Rng rng(derive_seed(cfg.seed, "si", source));
    std::vector<uint8_t> infected_mask(g->node_count(), 0);
    std::vector<NodeId> order{source};
    infected_mask[source] = 1;

    // Frontier bookkeeping: candidate susceptible nodes plus, per candidate,
    // its current edge count into the infected set.
    std::vector<NodeId> frontier;
    std::vector<uint32_t> edges_in(g->node_count(), 0);
    auto absorb = [&](NodeId fresh) {
        for (NodeId w : g->neighbors(fresh)) {
            if (infected_mask[w]) continue;
            if (edges_in[w] == 0) frontier.push_back(w);
            ++edges_in[w];
        }
    };
    absorb(source);

    while (order.size() < target && !frontier.empty()) {
        size_t pick = 0;
        if (cfg.frontier_rule == FrontierRule::kNodeUniform) {
            pick = rng.bounded(frontier.size());
        } else {
            uint64_t total = 0;
            for (NodeId v : frontier) total += edges_in[v];
            uint64_t roll = rng.bounded(total);
            uint64_t acc = 0;
            for (size_t i = 0; i < frontier.size(); ++i) {
                acc += edges_in[frontier[i]];
                if (roll < acc) {
                    pick = i;
                    break;
                }
            }
        }
        NodeId fresh = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        infected_mask[fresh] = 1;
        edges_in[fresh] = 0;
        order.push_back(fresh);
        absorb(fresh);
    }

    EpidemicNetwork net;
    net.base = std::move(g);
    net.infected = order;
    net.induced = Subgraph(net.base, order);
    net.config = cfg;
    return net;
}

NodeId random_source(const Graph& g, uint64_t seed) {
    if (g.node_count() == 0) throw DataError("random_source: empty graph");
    Rng rng(derive_seed(seed, "source"));
    return static_cast<NodeId>(rng.bounded(g.node_count()));
}

}  // namespace deeptrace
