#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deeptrace/epidemic.hpp"
#include "deeptrace/graph.hpp"
#include "deeptrace/likelihood.hpp"

namespace deeptrace {

enum class TraceStrategy { kBfs, kDfs };

std::string strategy_name(TraceStrategy s);
TraceStrategy strategy_from_name(const std::string& name);

/// What forward tracing has revealed: every contact of every traced node,
/// with test results. Indexed in parallel with the traced view's nodes().
/// degree_sum_all additionally counts the boundary contacts themselves (one
/// observed edge endpoint per traced neighbor), the denominator the degree
/// ratio feature normalizes by.
struct ObservedContacts {
    std::vector<NodeId> nodes;
    std::vector<uint32_t> observed_degree;  // all contacts of the node
    std::vector<uint32_t> infected_degree;  // contacts that tested positive
    double degree_sum_all = 0.0;
};

ObservedContacts observe_contacts(const EpidemicNetwork& epidemic, const Subgraph& traced_view);

/// Forward tracing in progress. Growth happens one infected node per step,
/// following the strategy's visit discipline over the infected induced
/// subgraph (ascending-NodeId tie-break); contacts that test negative are
/// recorded but never expanded through.
struct TraceState {
    std::shared_ptr<const EpidemicNetwork> epidemic;
    NodeId index_case = kNoNode;
    TraceStrategy strategy = TraceStrategy::kBfs;
    std::vector<NodeId> traced;        // tracing order, traced[0] = index case
    std::vector<uint8_t> traced_mask;  // by base id
    std::vector<NodeId> pending;       // strategy frontier, precomputed order
    size_t cursor = 0;

    bool complete() const { return cursor >= pending.size(); }
};

TraceState start_trace(std::shared_ptr<const EpidemicNetwork> epidemic, NodeId index_case,
                       TraceStrategy strategy);

/// Adds one node; returns false when no untraced infected node is reachable
/// (trace complete).
bool trace_step(TraceState& state);

/// Current G_n as a view over the base graph.
Subgraph traced_view(const TraceState& state);

/// Everything a per-stage estimator may look at.
struct TraceSnapshot {
    const EpidemicNetwork& epidemic;
    Subgraph support;
    ObservedContacts contacts;
    size_t stage = 0;     // n, number of traced nodes
    uint64_t seed = 0;    // per-stage substream
};

/// Returns the estimated superspreader for the snapshot (ties already broken
/// to the lowest NodeId by the implementations below).
using StageEstimator = std::function<NodeId(const TraceSnapshot&)>;

struct TraceRun {
    TraceStrategy strategy = TraceStrategy::kBfs;
    NodeId index_case = kNoNode;
    std::vector<NodeId> order;      // full tracing order
    std::vector<NodeId> estimates;  // v*_1 .. v*_N
    uint32_t estimate_every = 1;
    uint64_t seed = 0;
    std::string estimator;  // tag for run records
};

/// Runs tracing to completion, invoking the estimator after every stage.
/// estimate_every > 1 evaluates only every k-th stage (and the first and
/// last); skipped stages carry the previous estimate forward.
TraceRun run_trace(std::shared_ptr<const EpidemicNetwork> epidemic, NodeId index_case,
                   TraceStrategy strategy, const StageEstimator& estimator, uint64_t seed,
                   uint32_t estimate_every = 1);

/// Consecutive estimate pairs: unchanged (S1), first-time (S2), revisited (S3).
struct TransitionCounts {
    size_t unchanged = 0;
    size_t first_time = 0;
    size_t revisited = 0;
    std::vector<int> tags;  // 1, 2 or 3 per pair

    size_t total() const { return unchanged + first_time + revisited; }
};

TransitionCounts classify_transitions(std::span<const NodeId> estimates);

/// True iff the deduplicated consecutive estimates form a shortest path in
/// the epidemic network from the first to the last estimate.
bool is_shortest_path_trajectory(std::span<const NodeId> estimates,
                                 const EpidemicNetwork& epidemic);

// Stage estimators. Each scores the snapshot's support and returns the
// lowest-id maximizer.

/// Exact MLE by enumeration; feasible for small supports only.
StageEstimator make_exact_estimator(LikelihoodConfig cfg);

/// Tree centroid of the support (the regular-tree MLE).
StageEstimator make_centroid_estimator();

/// Rumor centrality: argmax of |Omega(G_n|v)| via O(N) message passing.
StageEstimator make_rumor_centrality_estimator();

/// rsavr / bfsran / degmax / degmin / degran over the support.
StageEstimator make_sampling_estimator(std::string kind, uint32_t k, LikelihoodConfig cfg);

}  // namespace deeptrace
