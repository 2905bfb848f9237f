#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deeptrace/graph.hpp"
#include "deeptrace/rng.hpp"

namespace deeptrace {

/// How the next infected node is drawn from the frontier.
///   kNodeUniform: uniform over susceptible nodes adjacent to the infected set.
///   kEdgeUniform: uniform over boundary edges, so a susceptible node's chance
///                 is proportional to its edge count into the infected set.
/// The two coincide on trees. Edge-uniform is the default because it matches
/// the weighting of the permutation-probability numerator.
enum class FrontierRule { kNodeUniform, kEdgeUniform };

struct SiConfig {
    double stop_fraction = 0.20;
    FrontierRule frontier_rule = FrontierRule::kEdgeUniform;
    uint64_t seed = 0;
};

/// Ground-truth spreading outcome: the contact universe, the infection order
/// (first element is the source), and the induced view on infected nodes.
/// Carries the config that produced it so persisted networks can be
/// regenerated.
struct EpidemicNetwork {
    GraphPtr base;
    std::vector<NodeId> infected;
    Subgraph induced;
    SiConfig config;

    NodeId source() const { return infected.front(); }
    size_t infected_count() const { return infected.size(); }
};

enum class GraphFamily {
    kErdosRenyi,
    kBarabasiAlbert,
    kWattsStrogatz,
    kRandomRegularTree,
    kCompleteNaryTree,
    kRandomTree,
};

std::string family_name(GraphFamily family);
GraphFamily family_from_name(const std::string& name);

struct GeneratorSpec {
    GraphFamily family = GraphFamily::kErdosRenyi;
    uint32_t size = 0;
    double edge_probability = 0.0;    // erdos-renyi
    uint32_t attach_count = 0;        // barabasi-albert
    uint32_t ring_degree = 0;         // watts-strogatz (even)
    double rewire_probability = 0.0;  // watts-strogatz
    uint32_t regular_degree = 0;      // random-regular-tree
    uint32_t arity = 0;               // complete-nary-tree
    uint64_t seed = 0;
};

struct Generated {
    GraphPtr graph;
    uint32_t attempts = 1;              // resamples used to reach connectivity
    bool giant_component_taken = false; // recorded substitution after 100 tries
};

/// Deterministic per spec.seed. Random families are resampled (sub-seeded)
/// until connected, up to 100 attempts, after which the giant component is
/// taken and the substitution recorded.
Generated generate(const GeneratorSpec& spec);

/// SI spreading from source until ceil(stop_fraction * n) nodes are infected.
EpidemicNetwork simulate_si(GraphPtr g, NodeId source, const SiConfig& cfg);

NodeId random_source(const Graph& g, uint64_t seed);

}  // namespace deeptrace
