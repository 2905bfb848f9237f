#include "deeptrace/tracing.hpp"

#include <algorithm>
#include <queue>

#include "deeptrace/errors.hpp"

namespace deeptrace {

std::string strategy_name(TraceStrategy s) {
    return s == TraceStrategy::kBfs ? "bfs" : "dfs";
}

TraceStrategy strategy_from_name(const std::string& name) {
    if (name == "bfs" || name == "BFS") return TraceStrategy::kBfs;
    if (name == "dfs" || name == "DFS") return TraceStrategy::kDfs;
    throw DataError("unknown trace strategy: " + name);
}

ObservedContacts observe_contacts(const EpidemicNetwork& epidemic, const Subgraph& traced_view) {
    const Graph& base = *epidemic.base;
    ObservedContacts obs;
    obs.nodes.assign(traced_view.nodes().begin(), traced_view.nodes().end());
    obs.observed_degree.reserve(obs.nodes.size());
    obs.infected_degree.reserve(obs.nodes.size());

    std::vector<uint32_t> boundary_edges(base.node_count(), 0);
    double total = 0.0;
    for (NodeId v : obs.nodes) {
        uint32_t infected = 0;
        for (NodeId w : base.neighbors(v)) {
            if (epidemic.induced.contains(w)) ++infected;
            if (!traced_view.contains(w)) ++boundary_edges[w];
        }
        obs.observed_degree.push_back(static_cast<uint32_t>(base.degree(v)));
        obs.infected_degree.push_back(infected);
        total += static_cast<double>(base.degree(v));
    }
    for (NodeId u = 0; u < base.node_count(); ++u) total += boundary_edges[u];
    obs.degree_sum_all = total;
    return obs;
}

TraceState start_trace(std::shared_ptr<const EpidemicNetwork> epidemic, NodeId index_case,
                       TraceStrategy strategy) {
    if (!epidemic) throw DataError("start_trace: missing epidemic network");
    if (!epidemic->induced.contains(index_case)) {
        throw DataError("start_trace: index case " + std::to_string(index_case) +
                        " is not infected");
    }
    TraceState state;
    state.epidemic = std::move(epidemic);
    state.index_case = index_case;
    state.strategy = strategy;
    state.traced_mask.assign(state.epidemic->base->node_count(), 0);

    // The strategy's full visit order over the infected induced subgraph.
    // Materialized ids are order-isomorphic to base ids, so the ascending
    // tie-break carries over.
    auto [induced_graph, mapping] = state.epidemic->induced.materialize();
    NodeId local_root = state.epidemic->induced.index_of(index_case);
    RootedTree tree = strategy == TraceStrategy::kBfs ? bfs_tree(induced_graph, local_root)
                                                      : dfs_tree(induced_graph, local_root);
    state.pending.reserve(tree.visit_order.size());
    for (NodeId local : tree.visit_order) state.pending.push_back(mapping[local]);

    trace_step(state);  // stage 1: the index case itself
    return state;
}

bool trace_step(TraceState& state) {
    if (state.complete()) return false;
    NodeId fresh = state.pending[state.cursor++];
    state.traced.push_back(fresh);
    state.traced_mask[fresh] = 1;
    return true;
}

Subgraph traced_view(const TraceState& state) {
    return Subgraph(state.epidemic->base, state.traced);
}

TraceRun run_trace(std::shared_ptr<const EpidemicNetwork> epidemic, NodeId index_case,
                   TraceStrategy strategy, const StageEstimator& estimator, uint64_t seed,
                   uint32_t estimate_every) {
    if (estimate_every == 0) throw DataError("run_trace: estimate_every must be >= 1");
    TraceState state = start_trace(epidemic, index_case, strategy);

    TraceRun run;
    run.strategy = strategy;
    run.index_case = index_case;
    run.estimate_every = estimate_every;
    run.seed = seed;

    size_t total = state.pending.size();
    NodeId last_estimate = index_case;
    for (;;) {
        size_t stage = state.traced.size();
        bool evaluate = stage == 1 || stage == total || (stage % estimate_every) == 0;
        if (evaluate) {
            TraceSnapshot snapshot{*state.epidemic, traced_view(state),
                                   ObservedContacts{}, stage,
                                   derive_seed(seed, "stage", stage)};
            snapshot.contacts = observe_contacts(*state.epidemic, snapshot.support);
            last_estimate = estimator(snapshot);
        }
        run.estimates.push_back(last_estimate);
        if (!trace_step(state)) break;
    }
    run.order = state.traced;
    return run;
}

TransitionCounts classify_transitions(std::span<const NodeId> estimates) {
    TransitionCounts counts;
    auto seen_before = [&](NodeId v, size_t upto) {
        for (size_t j = 0; j < upto; ++j) {
            if (estimates[j] == v) return true;
        }
        return false;
    };
    for (size_t i = 0; i + 1 < estimates.size(); ++i) {
        if (estimates[i + 1] == estimates[i]) {
            counts.unchanged++;
            counts.tags.push_back(1);
        } else if (!seen_before(estimates[i + 1], i + 1)) {
            counts.first_time++;
            counts.tags.push_back(2);
        } else {
            counts.revisited++;
            counts.tags.push_back(3);
        }
    }
    return counts;
}

// BFS distance inside a subgraph view.
static std::optional<uint32_t> view_distance(const Subgraph& view, NodeId from, NodeId to) {
    if (from == to) return 0;
    std::vector<uint32_t> dist(view.size(), RootedTree::kUnreached);
    dist[view.index_of(from)] = 0;
    std::queue<NodeId> queue;
    queue.push(from);
    while (!queue.empty()) {
        NodeId x = queue.front();
        queue.pop();
        for (NodeId y : view.neighbors_in(x)) {
            uint32_t yp = view.index_of(y);
            if (dist[yp] == RootedTree::kUnreached) {
                dist[yp] = dist[view.index_of(x)] + 1;
                if (y == to) return dist[yp];
                queue.push(y);
            }
        }
    }
    return std::nullopt;
}

bool is_shortest_path_trajectory(std::span<const NodeId> estimates,
                                 const EpidemicNetwork& epidemic) {
    if (estimates.empty()) throw DataError("is_shortest_path_trajectory: empty sequence");
    const Subgraph& gn = epidemic.induced;
    std::vector<NodeId> path;
    for (NodeId v : estimates) {
        if (!gn.contains(v)) {
            throw DataError("estimate " + std::to_string(v) + " outside the epidemic network");
        }
        if (path.empty() || path.back() != v) path.push_back(v);
    }
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        auto row = gn.neighbors_in(path[i]);
        if (!std::binary_search(row.begin(), row.end(), path[i + 1])) return false;
    }
    auto shortest = view_distance(gn, path.front(), path.back());
    return shortest.has_value() && *shortest == path.size() - 1;
}

// Stage estimators keep the previous stage's estimate while it stays in the
// argmax set, falling back to the lowest NodeId. Pure lowest-id tie-breaking
// flaps between tied centroid pairs as the network grows, which breaks the
// shortest-path trajectory of Theorem 1; sticky-then-lowest is equally
// deterministic. State resets at stage 1, so an estimator instance serves
// one run at a time.
namespace {

struct StickyState {
    NodeId previous = kNoNode;

    NodeId resolve(std::span<const NodeId> candidates_ascending, size_t stage) {
        if (stage == 1) previous = kNoNode;
        if (previous != kNoNode) {
            for (NodeId c : candidates_ascending) {
                if (c == previous) return previous;
            }
        }
        previous = candidates_ascending.front();
        return previous;
    }
};

std::vector<NodeId> score_argmax(const Subgraph& support, std::span<const double> scores) {
    double best = kNegInf;
    for (double s : scores) best = std::max(best, s);
    std::vector<NodeId> out;
    auto nodes = support.nodes();
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (scores[i] >= best - 1e-9) out.push_back(nodes[i]);
    }
    return out;
}

}  // namespace

StageEstimator make_exact_estimator(LikelihoodConfig cfg) {
    auto state = std::make_shared<StickyState>();
    return [cfg, state](const TraceSnapshot& snapshot) -> NodeId {
        DegreeContext ctx{&snapshot.epidemic.induced};
        SourceScores scores = exact_mle(snapshot.support, cfg, ctx);
        return state->resolve(scores.argmax, snapshot.stage);
    };
}

StageEstimator make_centroid_estimator() {
    auto state = std::make_shared<StickyState>();
    return [state](const TraceSnapshot& snapshot) -> NodeId {
        auto [graph, mapping] = snapshot.support.materialize();
        std::vector<NodeId> centers = centroid(graph);  // ascending
        for (NodeId& c : centers) c = mapping[c];
        return state->resolve(centers, snapshot.stage);
    };
}

StageEstimator make_rumor_centrality_estimator() {
    auto state = std::make_shared<StickyState>();
    return [state](const TraceSnapshot& snapshot) -> NodeId {
        if (snapshot.support.size() == 1) {
            return state->resolve(snapshot.support.nodes(), snapshot.stage);
        }
        std::vector<double> logs = log_count_permutations_all(snapshot.support);
        return state->resolve(score_argmax(snapshot.support, logs), snapshot.stage);
    };
}

StageEstimator make_sampling_estimator(std::string kind, uint32_t k, LikelihoodConfig cfg) {
    auto state = std::make_shared<StickyState>();
    return [kind = std::move(kind), k, cfg, state](const TraceSnapshot& snapshot) -> NodeId {
        DegreeContext ctx{&snapshot.epidemic.induced};
        SourceScores scores = approx_scores(snapshot.support, kind, k, cfg, ctx, snapshot.seed);
        return state->resolve(scores.argmax, snapshot.stage);
    };
}

}  // namespace deeptrace
