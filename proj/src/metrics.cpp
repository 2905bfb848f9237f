#include "deeptrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

#include "deeptrace/errors.hpp"

namespace deeptrace {

static uint32_t epidemic_distance(const EpidemicNetwork& epidemic, NodeId u, NodeId v) {
    const Subgraph& gn = epidemic.induced;
    if (!gn.contains(u) || !gn.contains(v)) {
        throw DataError("average_error: node outside the epidemic network");
    }
    if (u == v) return 0;
    std::vector<uint32_t> dist(gn.size(), RootedTree::kUnreached);
    dist[gn.index_of(u)] = 0;
    std::queue<NodeId> queue;
    queue.push(u);
    while (!queue.empty()) {
        NodeId x = queue.front();
        queue.pop();
        for (NodeId y : gn.neighbors_in(x)) {
            uint32_t yp = gn.index_of(y);
            if (dist[yp] == RootedTree::kUnreached) {
                dist[yp] = dist[gn.index_of(x)] + 1;
                if (y == v) return dist[yp];
                queue.push(y);
            }
        }
    }
    throw DataError("average_error: estimate unreachable from target");
}

double average_error(std::span<const NodeId> estimates, NodeId target,
                     const EpidemicNetwork& epidemic) {
    if (estimates.empty()) throw DataError("average_error: empty estimate sequence");
    double total = 0.0;
    for (NodeId v : estimates) total += epidemic_distance(epidemic, v, target);
    return total / static_cast<double>(estimates.size());
}

std::optional<uint32_t> first_detected_time(std::span<const NodeId> estimates, NodeId target) {
    for (size_t i = 0; i < estimates.size(); ++i) {
        if (estimates[i] == target) return static_cast<uint32_t>(i);
    }
    return std::nullopt;
}

double bias_percent(double approx_logp, double exact_logp) {
    if (!std::isfinite(approx_logp) || !std::isfinite(exact_logp)) {
        throw NumericalError("bias_percent: non-finite log probability");
    }
    if (exact_logp == 0.0) {
        throw NumericalError(
            "bias_percent: exact probability is 1 (degenerate normalization case)");
    }
    return std::abs((approx_logp - exact_logp) / exact_logp) * 100.0;
}

double topk_accuracy(std::span<const std::vector<NodeId>> rankings,
                     std::span<const NodeId> ground_truths, size_t k) {
    if (rankings.empty()) throw DataError("topk_accuracy: no instances");
    if (rankings.size() != ground_truths.size()) {
        throw DataError("topk_accuracy: rankings and ground truths differ in length");
    }
    size_t hits = 0;
    for (size_t i = 0; i < rankings.size(); ++i) {
        const auto& ranking = rankings[i];
        size_t limit = std::min(k, ranking.size());
        for (size_t j = 0; j < limit; ++j) {
            if (ranking[j] == ground_truths[i]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

void ensure_discriminative(std::span<const double> log_scores) {
    if (log_scores.empty()) throw DataError("ensure_discriminative: empty scores");
    auto [lo, hi] = std::minmax_element(log_scores.begin(), log_scores.end());
    if (*hi - *lo < 1e-9) {
        throw NumericalError(
            "scores are constant across sources (normalization-degenerate universe); "
            "choose a degree universe strictly larger than the support");
    }
}

std::string EvalReport::to_csv() const {
    std::string out = "metric,value\n" + metric + "," + std::to_string(value) + "\n";
    out += "instance,value\n";
    for (size_t i = 0; i < breakdown.size(); ++i) {
        out += std::to_string(i) + "," + std::to_string(breakdown[i]) + "\n";
    }
    return out;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["metric"] = metric;
    j["value"] = value;
    j["breakdown"] = breakdown;
    if (!config_snapshot.empty()) {
        j["config"] = nlohmann::json::parse(config_snapshot);
    }
    return j.dump(2);
}

}  // namespace deeptrace
