#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deeptrace/epidemic.hpp"
#include "deeptrace/graph.hpp"
#include "deeptrace/rng.hpp"

namespace deeptrace {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Which graph supplies the degrees d(v_i) of the permutation-probability
/// denominator. With kTracingNetwork (degrees of the support itself) the
/// exact likelihood sums to 1 for every source — a proper distribution but a
/// vacuous argmax. A universe strictly larger than the support is what makes
/// the estimator discriminative.
enum class DegreeUniverse {
    kTracingNetwork,   // degrees within the support view
    kObservedContacts, // full contact degrees of traced nodes (base graph)
    kEpidemicNetwork,  // degrees within the infected induced subgraph
    kConstantDegree,   // idealized d-regular universe
};

/// kLiteralEq3 evaluates the printed formula, whose denominator correction
/// term 2(i - Phi_{i-1} - 1) tracks the true internal-edge count only on
/// trees. kExactBoundary replaces it with twice the accumulated internal
/// edge count, which is the boundary size of a genuine frontier process on
/// any support. The two coincide on trees. Both are kept, never merged.
enum class ProbabilityMode { kLiteralEq3, kExactBoundary };

struct LikelihoodConfig {
    ProbabilityMode mode = ProbabilityMode::kExactBoundary;
    DegreeUniverse universe = DegreeUniverse::kTracingNetwork;
    uint32_t constant_degree = 0;        // for kConstantDegree
    uint64_t enumeration_cap = 1000000;  // permutations
};

std::string universe_name(DegreeUniverse u);
DegreeUniverse universe_from_name(const std::string& name);
std::string mode_name(ProbabilityMode m);
ProbabilityMode mode_from_name(const std::string& name);

/// Extra graphs some universes need (kEpidemicNetwork reads degrees from the
/// infected induced view, which may be larger than the scored support).
struct DegreeContext {
    const Subgraph* epidemic_view = nullptr;
};

/// Universe degrees for each support node, indexed by support position.
/// Throws if the universe is infeasible (constant degree below the support's
/// max degree, or a missing epidemic view).
std::vector<uint32_t> resolve_degrees(const Subgraph& support, const LikelihoodConfig& cfg,
                                      const DegreeContext& ctx = {});

struct Permutation {
    std::vector<NodeId> order;  // (v, v_1, ..., v_{n-1}), base ids
};

/// Per-source log scores with the config snapshot they were computed under.
struct SourceScores {
    std::vector<NodeId> nodes;       // support nodes, ascending
    std::vector<double> log_scores;  // parallel to nodes
    std::vector<NodeId> argmax;      // every maximizer, ascending
    std::string estimator;
    LikelihoodConfig config;
    std::string notes;  // sampling rule, approximate-count fallback, ...

    /// Deterministic estimate: the lowest-id maximizer.
    NodeId top() const { return argmax.front(); }
};

/// log P(sigma | sigma[0]) under the configured mode/universe. Returns -inf
/// for a non-permitted order. Throws NumericalError when the literal formula
/// produces a non-positive denominator (formula-degenerate case).
double log_permutation_probability(std::span<const NodeId> order, const Subgraph& support,
                                   std::span<const uint32_t> universe_degrees,
                                   ProbabilityMode mode);

double log_permutation_probability(const Permutation& sigma, const Subgraph& support,
                                   const LikelihoodConfig& cfg, const DegreeContext& ctx = {});

/// All permitted permutations rooted at source, lexicographically ordered.
/// Throws DataError (advising the sampling estimators) once the cap is hit.
std::vector<std::vector<NodeId>> enumerate_permitted(const Subgraph& support, NodeId source,
                                                     uint64_t cap);

/// log of the exact likelihood: sum of P(sigma|v) over all permitted
/// permutations. Enumeration-backed; respects cfg.enumeration_cap.
double exact_log_likelihood(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                            const DegreeContext& ctx = {});

/// Eq-10 decomposition helper: log of the average permutation probability,
/// i.e. exact_log_likelihood - log |Omega|. Enumeration-backed.
double exact_average_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                         const DegreeContext& ctx = {});

SourceScores exact_mle(const Subgraph& support, const LikelihoodConfig& cfg,
                       const DegreeContext& ctx = {});

/// |Omega(tree|root)| = n! / prod of subtree sizes, exact big integer plus a
/// natural-log companion. Two passes, O(N). Throws DataError on non-trees.
struct TreeCount {
    mpz_class exact;
    double log_value;
};
TreeCount count_permutations_tree(const Subgraph& tree, NodeId root);

/// Log counts for every root in one rerooting pass, indexed by support
/// position. O(N).
std::vector<double> log_count_permutations_all(const Subgraph& tree);

/// Random growth from source: each step extends by a frontier node drawn per
/// rule. Always yields a permitted permutation.
std::vector<NodeId> sample_permutation(const Subgraph& support, NodeId source, Rng& rng,
                                       FrontierRule rule = FrontierRule::kEdgeUniform);

/// RSAvr: log of (mean probability of k growth-sampled permutations) times
/// |Omega|. |Omega| is exact on trees and falls back to the BFS spanning
/// tree count otherwise (recorded in *note). When enumerate_when_feasible
/// is set and |Omega| <= min(k, cap), sampling is replaced by enumeration
/// and the estimator collapses to the exact average form.
double approx_rsavr_log(const Subgraph& support, NodeId v, uint32_t k,
                        const LikelihoodConfig& cfg, const DegreeContext& ctx, Rng& rng,
                        std::string* note = nullptr, bool enumerate_when_feasible = false);

/// BFSRan baseline: log of P(sigma_bfs | v) times |Omega|, where sigma_bfs is
/// the permitted permutation of one uniformly randomized BFS traversal from v.
double approx_bfsran_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                         const DegreeContext& ctx, Rng& rng, std::string* note = nullptr);

enum class ExtremeMode { kDegMax, kDegMin, kDegRan };

/// DegMax / DegMin / DegRan: extreme or randomly chosen single permutation
/// probability times |Omega|. Exact over enumeration while |Omega| fits the
/// cap, otherwise over k growth samples (recorded in *note).
double approx_extreme_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                          const DegreeContext& ctx, ExtremeMode mode, Rng& rng, uint32_t k,
                          std::string* note = nullptr);

/// Score every support node with per-source RNG substreams derived from
/// (seed, node). estimator selects among {rsavr, bfsran, degmax, degmin,
/// degran}; k is the sample count where applicable.
SourceScores approx_scores(const Subgraph& support, const std::string& estimator, uint32_t k,
                           const LikelihoodConfig& cfg, const DegreeContext& ctx, uint64_t seed);

double log_sum_exp(std::span<const double> values);

}  // namespace deeptrace
