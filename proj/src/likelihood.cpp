#include "deeptrace/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "deeptrace/errors.hpp"

namespace deeptrace {

std::string universe_name(DegreeUniverse u) {
    switch (u) {
        case DegreeUniverse::kTracingNetwork: return "tracing-network";
        case DegreeUniverse::kObservedContacts: return "observed-contacts";
        case DegreeUniverse::kEpidemicNetwork: return "epidemic-network";
        case DegreeUniverse::kConstantDegree: return "constant-d";
    }
    throw DataError("unknown degree universe");
}

DegreeUniverse universe_from_name(const std::string& name) {
    if (name == "tracing-network") return DegreeUniverse::kTracingNetwork;
    if (name == "observed-contacts") return DegreeUniverse::kObservedContacts;
    if (name == "epidemic-network") return DegreeUniverse::kEpidemicNetwork;
    if (name == "constant-d") return DegreeUniverse::kConstantDegree;
    throw DataError("unknown degree universe: " + name);
}

std::string mode_name(ProbabilityMode m) {
    return m == ProbabilityMode::kLiteralEq3 ? "literal-eq3" : "exact-boundary";
}

ProbabilityMode mode_from_name(const std::string& name) {
    if (name == "literal-eq3") return ProbabilityMode::kLiteralEq3;
    if (name == "exact-boundary") return ProbabilityMode::kExactBoundary;
    throw DataError("unknown probability mode: " + name);
}

std::vector<uint32_t> resolve_degrees(const Subgraph& support, const LikelihoodConfig& cfg,
                                      const DegreeContext& ctx) {
    std::vector<uint32_t> degrees(support.size());
    auto nodes = support.nodes();
    switch (cfg.universe) {
        case DegreeUniverse::kTracingNetwork:
            for (size_t i = 0; i < nodes.size(); ++i) {
                degrees[i] = static_cast<uint32_t>(support.degree_in(nodes[i]));
            }
            break;
        case DegreeUniverse::kObservedContacts:
            for (size_t i = 0; i < nodes.size(); ++i) {
                degrees[i] = static_cast<uint32_t>(support.base().degree(nodes[i]));
            }
            break;
        case DegreeUniverse::kEpidemicNetwork:
            if (ctx.epidemic_view == nullptr) {
                throw DataError("epidemic-network universe needs an epidemic view");
            }
            for (size_t i = 0; i < nodes.size(); ++i) {
                if (!ctx.epidemic_view->contains(nodes[i])) {
                    throw DataError("support node outside the epidemic view");
                }
                degrees[i] = static_cast<uint32_t>(ctx.epidemic_view->degree_in(nodes[i]));
            }
            break;
        case DegreeUniverse::kConstantDegree: {
            uint32_t max_deg = 0;
            for (NodeId v : nodes) {
                max_deg = std::max<uint32_t>(max_deg, support.degree_in(v));
            }
            if (cfg.constant_degree < max_deg) {
                throw DataError("constant degree " + std::to_string(cfg.constant_degree) +
                                " below support max degree " + std::to_string(max_deg));
            }
            std::fill(degrees.begin(), degrees.end(), cfg.constant_degree);
            break;
        }
    }
    return degrees;
}

double log_permutation_probability(std::span<const NodeId> order, const Subgraph& support,
                                   std::span<const uint32_t> universe_degrees,
                                   ProbabilityMode mode) {
    if (order.empty()) throw DataError("empty permutation");
    if (universe_degrees.size() != support.size()) {
        throw DataError("universe degree table does not match support size");
    }
    if (!support.contains(order[0])) return kNegInf;

    std::vector<uint8_t> in_prefix(support.size(), 0);
    in_prefix[support.index_of(order[0])] = 1;

    uint64_t degree_sum = universe_degrees[support.index_of(order[0])];
    uint64_t internal_edges = 0;  // support edges inside the prefix
    uint64_t phi_prev = 1;        // Phi_1 := 1 by convention
    double log_prob = 0.0;

    for (size_t i = 1; i < order.size(); ++i) {
        NodeId v = order[i];
        if (!support.contains(v)) return kNegInf;
        uint32_t pos = support.index_of(v);
        if (in_prefix[pos]) return kNegInf;  // duplicate

        uint64_t phi = 0;  // edges from v into the prefix
        for (NodeId w : support.neighbors_in(v)) {
            if (in_prefix[support.index_of(w)]) ++phi;
        }
        if (phi == 0) return kNegInf;  // not adjacent to any earlier node

        int64_t denominator;
        if (mode == ProbabilityMode::kLiteralEq3) {
            // i is 1-based in the formula; here order[i] is the (i+1)-th node.
            int64_t step = static_cast<int64_t>(i) + 1;
            denominator = static_cast<int64_t>(degree_sum) -
                          2 * (step - static_cast<int64_t>(phi_prev) - 1);
            if (denominator <= 0) {
                throw NumericalError("literal-eq3 denominator non-positive at step " +
                                     std::to_string(step) + " (formula-degenerate)");
            }
        } else {
            denominator = static_cast<int64_t>(degree_sum) -
                          2 * static_cast<int64_t>(internal_edges);
            if (denominator <= 0) {
                throw NumericalError("boundary size non-positive: universe smaller than support");
            }
        }

        log_prob += std::log(static_cast<double>(phi)) - std::log(static_cast<double>(denominator));
        in_prefix[pos] = 1;
        degree_sum += universe_degrees[pos];
        internal_edges += phi;
        phi_prev = phi;
    }
    return log_prob;
}

double log_permutation_probability(const Permutation& sigma, const Subgraph& support,
                                   const LikelihoodConfig& cfg, const DegreeContext& ctx) {
    auto degrees = resolve_degrees(support, cfg, ctx);
    return log_permutation_probability(sigma.order, support, degrees, cfg.mode);
}

namespace {

struct EnumerationState {
    const Subgraph& support;
    uint64_t cap;
    std::vector<std::vector<NodeId>>& out;
    std::vector<NodeId> order;
    std::vector<uint8_t> in_set;       // by support position
    std::vector<uint8_t> in_frontier;  // by support position

    void grow(const std::vector<NodeId>& frontier) {
        if (order.size() == support.size()) {
            if (out.size() >= cap) {
                throw DataError("permitted-permutation cap (" + std::to_string(cap) +
                                ") exceeded; use the sampling estimators");
            }
            out.push_back(order);
            return;
        }
        for (size_t i = 0; i < frontier.size(); ++i) {
            NodeId v = frontier[i];
            uint32_t pos = support.index_of(v);
            in_set[pos] = 1;
            order.push_back(v);

            std::vector<NodeId> next;
            next.reserve(frontier.size());
            for (size_t j = 0; j < frontier.size(); ++j) {
                if (j != i) next.push_back(frontier[j]);
            }
            std::vector<NodeId> fresh;
            for (NodeId w : support.neighbors_in(v)) {
                uint32_t wp = support.index_of(w);
                if (!in_set[wp] && !in_frontier[wp]) {
                    in_frontier[wp] = 1;
                    fresh.push_back(w);
                }
            }
            size_t mid = next.size();
            next.insert(next.end(), fresh.begin(), fresh.end());
            std::inplace_merge(next.begin(), next.begin() + mid, next.end());

            grow(next);

            for (NodeId w : fresh) in_frontier[support.index_of(w)] = 0;
            order.pop_back();
            in_set[pos] = 0;
        }
    }
};

}  // namespace

std::vector<std::vector<NodeId>> enumerate_permitted(const Subgraph& support, NodeId source,
                                                     uint64_t cap) {
    if (!support.contains(source)) throw DataError("enumerate_permitted: source not in support");
    std::vector<std::vector<NodeId>> out;
    EnumerationState state{support, cap, out, {}, std::vector<uint8_t>(support.size(), 0),
                           std::vector<uint8_t>(support.size(), 0)};
    state.order.push_back(source);
    state.in_set[support.index_of(source)] = 1;
    std::vector<NodeId> frontier(support.neighbors_in(source).begin(),
                                 support.neighbors_in(source).end());
    for (NodeId w : frontier) state.in_frontier[support.index_of(w)] = 1;
    state.grow(frontier);
    return out;
}

double log_sum_exp(std::span<const double> values) {
    double best = kNegInf;
    for (double v : values) best = std::max(best, v);
    if (best == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - best);
    return best + std::log(acc);
}

double exact_log_likelihood(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                            const DegreeContext& ctx) {
    auto degrees = resolve_degrees(support, cfg, ctx);
    auto sigmas = enumerate_permitted(support, v, cfg.enumeration_cap);
    std::vector<double> logs;
    logs.reserve(sigmas.size());
    for (const auto& order : sigmas) {
        logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
    }
    return log_sum_exp(logs);
}

double exact_average_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                         const DegreeContext& ctx) {
    auto degrees = resolve_degrees(support, cfg, ctx);
    auto sigmas = enumerate_permitted(support, v, cfg.enumeration_cap);
    std::vector<double> logs;
    logs.reserve(sigmas.size());
    for (const auto& order : sigmas) {
        logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
    }
    return log_sum_exp(logs) - std::log(static_cast<double>(sigmas.size()));
}

static SourceScores finish_scores(const Subgraph& support, std::vector<double> logs,
                                  std::string estimator, const LikelihoodConfig& cfg,
                                  std::string notes) {
    SourceScores scores;
    scores.nodes.assign(support.nodes().begin(), support.nodes().end());
    scores.log_scores = std::move(logs);
    scores.estimator = std::move(estimator);
    scores.config = cfg;
    scores.notes = std::move(notes);
    double best = kNegInf;
    for (double s : scores.log_scores) best = std::max(best, s);
    // Genuine ties differ only by accumulated rounding (<< 1e-9 in log
    // domain); genuinely distinct sources differ by far more.
    for (size_t i = 0; i < scores.nodes.size(); ++i) {
        if (scores.log_scores[i] >= best - 1e-9) scores.argmax.push_back(scores.nodes[i]);
    }
    return scores;
}

SourceScores exact_mle(const Subgraph& support, const LikelihoodConfig& cfg,
                       const DegreeContext& ctx) {
    std::vector<double> logs;
    logs.reserve(support.size());
    for (NodeId v : support.nodes()) {
        logs.push_back(exact_log_likelihood(support, v, cfg, ctx));
    }
    return finish_scores(support, std::move(logs), "exact", cfg, "");
}

// Subtree sizes of the support's spanning tree rooted at root (the support
// itself when it is a tree), by support position.
static std::vector<uint32_t> view_subtree_sizes(const Subgraph& view, NodeId root,
                                                bool* used_spanning_tree) {
    size_t n = view.size();
    std::vector<uint32_t> parent(n, Subgraph::kNoIndex);
    std::vector<NodeId> order;
    order.reserve(n);
    std::vector<uint8_t> seen(n, 0);

    uint32_t root_pos = view.index_of(root);
    if (root_pos == Subgraph::kNoIndex) throw DataError("root not in view");
    seen[root_pos] = 1;
    order.push_back(root);
    size_t head = 0;
    uint64_t tree_edges = 0;
    while (head < order.size()) {
        NodeId u = order[head++];
        for (NodeId w : view.neighbors_in(u)) {
            uint32_t wp = view.index_of(w);
            if (!seen[wp]) {
                seen[wp] = 1;
                parent[wp] = view.index_of(u);
                order.push_back(w);
                ++tree_edges;
            }
        }
    }
    if (order.size() != n) throw DataError("support view is disconnected");
    if (used_spanning_tree != nullptr) {
        *used_spanning_tree = view.edge_count() != tree_edges;
    }

    std::vector<uint32_t> size(n, 1);
    for (size_t i = order.size(); i-- > 1;) {
        uint32_t pos = view.index_of(order[i]);
        size[parent[pos]] += size[pos];
    }
    return size;
}

TreeCount count_permutations_tree(const Subgraph& tree, NodeId root) {
    if (!tree.is_tree()) throw DataError("count_permutations_tree: support is not a tree");
    auto sizes = view_subtree_sizes(tree, root, nullptr);
    size_t n = tree.size();

    TreeCount result;
    result.log_value = std::lgamma(static_cast<double>(n) + 1.0);
    for (uint32_t s : sizes) result.log_value -= std::log(static_cast<double>(s));

    // n! / prod(sizes): factorial via GMP, divisor via a balanced product
    // tree; both stay fast at n = 10^6.
    mpz_class factorial;
    mpz_fac_ui(factorial.get_mpz_t(), static_cast<unsigned long>(n));
    std::vector<unsigned long> values(sizes.begin(), sizes.end());
    struct Prod {
        static mpz_class range(const std::vector<unsigned long>& v, size_t lo, size_t hi) {
            if (hi - lo == 1) return mpz_class(v[lo]);
            size_t mid = lo + (hi - lo) / 2;
            return range(v, lo, mid) * range(v, mid, hi);
        }
    };
    mpz_class divisor = Prod::range(values, 0, values.size());
    mpz_divexact(result.exact.get_mpz_t(), factorial.get_mpz_t(), divisor.get_mpz_t());
    return result;
}

std::vector<double> log_count_permutations_all(const Subgraph& tree) {
    if (!tree.is_tree()) throw DataError("log_count_permutations_all: support is not a tree");
    size_t n = tree.size();
    NodeId root = tree.nodes()[0];
    auto sizes = view_subtree_sizes(tree, root, nullptr);

    std::vector<double> logs(n, 0.0);
    double at_root = std::lgamma(static_cast<double>(n) + 1.0);
    for (uint32_t s : sizes) at_root -= std::log(static_cast<double>(s));
    logs[tree.index_of(root)] = at_root;

    // Rerooting across edge (v -> child u): count(u) = count(v) * s_u / (n - s_u),
    // where s_u is u's subtree size under the original root.
    std::vector<NodeId> stack{root};
    std::vector<uint8_t> done(n, 0);
    done[tree.index_of(root)] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        double log_v = logs[tree.index_of(v)];
        for (NodeId u : tree.neighbors_in(v)) {
            uint32_t up = tree.index_of(u);
            if (done[up]) continue;
            done[up] = 1;
            double s = static_cast<double>(sizes[up]);
            logs[up] = log_v + std::log(s) - std::log(static_cast<double>(n) - s);
            stack.push_back(u);
        }
    }
    return logs;
}

std::vector<NodeId> sample_permutation(const Subgraph& support, NodeId source, Rng& rng,
                                       FrontierRule rule) {
    if (!support.contains(source)) throw DataError("sample_permutation: source not in support");
    std::vector<NodeId> order{source};
    std::vector<uint8_t> in_set(support.size(), 0);
    in_set[support.index_of(source)] = 1;

    std::vector<NodeId> frontier;
    std::vector<uint32_t> edges_in(support.size(), 0);
    auto absorb = [&](NodeId fresh) {
        for (NodeId w : support.neighbors_in(fresh)) {
            uint32_t wp = support.index_of(w);
            if (in_set[wp]) continue;
            if (edges_in[wp] == 0) frontier.push_back(w);
            ++edges_in[wp];
        }
    };
    absorb(source);
    while (order.size() < support.size()) {
        if (frontier.empty()) throw DataError("sample_permutation: support view is disconnected");
        size_t pick = 0;
        if (rule == FrontierRule::kNodeUniform) {
            pick = rng.bounded(frontier.size());
        } else {
            uint64_t total = 0;
            for (NodeId v : frontier) total += edges_in[support.index_of(v)];
            uint64_t roll = rng.bounded(total);
            uint64_t acc = 0;
            for (size_t i = 0; i < frontier.size(); ++i) {
                acc += edges_in[support.index_of(frontier[i])];
                if (roll < acc) {
                    pick = i;
                    break;
                }
            }
        }
        NodeId fresh = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        uint32_t fp = support.index_of(fresh);
        in_set[fp] = 1;
        edges_in[fp] = 0;
        order.push_back(fresh);
        absorb(fresh);
    }
    return order;
}

// log |Omega| used by the sampling estimators: exact on trees, BFS spanning
// tree approximation otherwise.
static double log_count_for(const Subgraph& support, NodeId v, bool* approximate) {
    bool spanning = false;
    auto sizes = view_subtree_sizes(support, v, &spanning);
    if (approximate != nullptr) *approximate = spanning;
    double log_count = std::lgamma(static_cast<double>(support.size()) + 1.0);
    for (uint32_t s : sizes) log_count -= std::log(static_cast<double>(s));
    return log_count;
}

double approx_rsavr_log(const Subgraph& support, NodeId v, uint32_t k,
                        const LikelihoodConfig& cfg, const DegreeContext& ctx, Rng& rng,
                        std::string* note, bool enumerate_when_feasible) {
    if (k == 0) throw DataError("approx_rsavr: sample count must be >= 1");
    auto degrees = resolve_degrees(support, cfg, ctx);

    if (enumerate_when_feasible) {
        uint64_t cap = std::min<uint64_t>(cfg.enumeration_cap, k);
        try {
            auto sigmas = enumerate_permitted(support, v, cap);
            std::vector<double> logs;
            logs.reserve(sigmas.size());
            for (const auto& order : sigmas) {
                logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
            }
            if (note != nullptr) *note = "enumerated=" + std::to_string(sigmas.size());
            // average * |Omega| with the enumerated count on both sides.
            return log_sum_exp(logs);
        } catch (const DataError&) {
            // fall through to sampling
        }
    }

    std::vector<double> logs;
    logs.reserve(k);
    for (uint32_t i = 0; i < k; ++i) {
        auto order = sample_permutation(support, v, rng, FrontierRule::kEdgeUniform);
        logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
    }
    bool approximate = false;
    double log_count = log_count_for(support, v, &approximate);
    if (note != nullptr) {
        *note = std::string("samples=") + std::to_string(k) + ";rule=edge-uniform" +
                (approximate ? ";approximate-count" : "");
    }
    return log_sum_exp(logs) - std::log(static_cast<double>(k)) + log_count;
}

double approx_bfsran_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                         const DegreeContext& ctx, Rng& rng, std::string* note) {
    auto degrees = resolve_degrees(support, cfg, ctx);

    // Randomized BFS: fresh neighbors of each dequeued node join the queue in
    // random order.
    std::vector<NodeId> order{v};
    std::vector<uint8_t> seen(support.size(), 0);
    seen[support.index_of(v)] = 1;
    size_t head = 0;
    while (head < order.size()) {
        NodeId u = order[head++];
        std::vector<NodeId> fresh;
        for (NodeId w : support.neighbors_in(u)) {
            uint32_t wp = support.index_of(w);
            if (!seen[wp]) {
                seen[wp] = 1;
                fresh.push_back(w);
            }
        }
        rng.shuffle(fresh);
        order.insert(order.end(), fresh.begin(), fresh.end());
    }
    if (order.size() != support.size()) {
        throw DataError("approx_bfsran: support view is disconnected");
    }

    bool approximate = false;
    double log_count = log_count_for(support, v, &approximate);
    if (note != nullptr) {
        *note = std::string("rule=random-bfs") + (approximate ? ";approximate-count" : "");
    }
    return log_permutation_probability(order, support, degrees, cfg.mode) + log_count;
}

double approx_extreme_log(const Subgraph& support, NodeId v, const LikelihoodConfig& cfg,
                          const DegreeContext& ctx, ExtremeMode mode, Rng& rng, uint32_t k,
                          std::string* note) {
    auto degrees = resolve_degrees(support, cfg, ctx);
    std::vector<double> logs;
    std::string how;
    try {
        auto sigmas = enumerate_permitted(support, v, cfg.enumeration_cap);
        logs.reserve(sigmas.size());
        for (const auto& order : sigmas) {
            logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
        }
        how = "enumerated=" + std::to_string(sigmas.size());
    } catch (const DataError&) {
        if (k == 0) throw;
        logs.reserve(k);
        for (uint32_t i = 0; i < k; ++i) {
            auto order = sample_permutation(support, v, rng, FrontierRule::kEdgeUniform);
            logs.push_back(log_permutation_probability(order, support, degrees, cfg.mode));
        }
        how = "sampled=" + std::to_string(k);
    }

    double chosen;
    switch (mode) {
        case ExtremeMode::kDegMax: chosen = *std::max_element(logs.begin(), logs.end()); break;
        case ExtremeMode::kDegMin: chosen = *std::min_element(logs.begin(), logs.end()); break;
        case ExtremeMode::kDegRan: chosen = logs[rng.bounded(logs.size())]; break;
        default: throw DataError("unknown extreme mode");
    }
    bool approximate = false;
    double log_count = log_count_for(support, v, &approximate);
    if (note != nullptr) *note = how + (approximate ? ";approximate-count" : "");
    return chosen + log_count;
}

SourceScores approx_scores(const Subgraph& support, const std::string& estimator, uint32_t k,
                           const LikelihoodConfig& cfg, const DegreeContext& ctx, uint64_t seed) {
    std::vector<double> logs;
    logs.reserve(support.size());
    std::string note;
    for (NodeId v : support.nodes()) {
        Rng rng(derive_seed(seed, estimator + "/" + std::to_string(v)));
        if (estimator == "rsavr") {
            logs.push_back(approx_rsavr_log(support, v, k, cfg, ctx, rng, &note));
        } else if (estimator == "bfsran") {
            logs.push_back(approx_bfsran_log(support, v, cfg, ctx, rng, &note));
        } else if (estimator == "degmax") {
            logs.push_back(approx_extreme_log(support, v, cfg, ctx, ExtremeMode::kDegMax, rng, k, &note));
        } else if (estimator == "degmin") {
            logs.push_back(approx_extreme_log(support, v, cfg, ctx, ExtremeMode::kDegMin, rng, k, &note));
        } else if (estimator == "degran") {
            logs.push_back(approx_extreme_log(support, v, cfg, ctx, ExtremeMode::kDegRan, rng, k, &note));
        } else {
            throw DataError("unknown approximate estimator: " + estimator);
        }
    }
    return finish_scores(support, std::move(logs), estimator, cfg, note);
}

}  // namespace deeptrace
