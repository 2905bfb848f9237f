#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deeptrace/epidemic.hpp"
#include "deeptrace/graph.hpp"

namespace deeptrace {

/// Mean hop distance (in the epidemic network) between each stage's estimate
/// and the target. Zero iff every estimate equals the target.
double average_error(std::span<const NodeId> estimates, NodeId target,
                     const EpidemicNetwork& epidemic);

/// Zero-based stage index of the first estimate equal to the target;
/// nullopt when it is never detected.
std::optional<uint32_t> first_detected_time(std::span<const NodeId> estimates, NodeId target);

/// |(approx_logp - exact_logp) / exact_logp| * 100. Both arguments are log
/// probabilities. Throws NumericalError when exact_logp == 0 (probability 1,
/// the degenerate normalization case).
double bias_percent(double approx_logp, double exact_logp);

/// Fraction of instances whose ground truth appears among the first k ranked
/// nodes. Rankings shorter than k are used in full.
double topk_accuracy(std::span<const std::vector<NodeId>> rankings,
                     std::span<const NodeId> ground_truths, size_t k);

/// Guard for comparisons against "exact" scores: refuses constant score
/// vectors (the normalization-degenerate universe) instead of emitting
/// meaningless biases or rankings.
void ensure_discriminative(std::span<const double> log_scores);

struct EvalReport {
    std::string metric;
    double value = 0.0;
    std::vector<double> breakdown;
    std::string config_snapshot;  // JSON text

    std::string to_csv() const;
    std::string to_json() const;
};

}  // namespace deeptrace
