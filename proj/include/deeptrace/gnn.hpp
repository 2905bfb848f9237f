#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deeptrace/graph.hpp"
#include "deeptrace/tracing.hpp"

namespace deeptrace {

// --- features ---------------------------------------------------------

/// Per-node [degree_ratio, infected_proportion, boundary_distance_ratio],
/// indexed by support position.
struct NodeFeatures {
    std::vector<std::array<double, 3>> rows;
};

/// d(v) / sum of observed degrees over every node of the observed network
/// (traced nodes and their boundary contacts). Sums to 1 over that network.
std::vector<double> degree_ratio(const Subgraph& support, const ObservedContacts& contacts);

/// Infected contacts over all contacts. Throws on isolated nodes.
std::vector<double> infected_proportion(const Subgraph& support, const ObservedContacts& contacts);

/// b(v) / max_j b(v_j), where b(v) is the eccentricity of v restricted to the
/// support's leaf (boundary) nodes. Supports without degree-1 nodes fall back
/// to full eccentricity; a single node gets 1 by convention.
std::vector<double> boundary_distance_ratio(const Subgraph& support);

NodeFeatures extract_features(const Subgraph& support, const ObservedContacts& contacts);

// --- model ------------------------------------------------------------

enum class AggregatorKind { kMean, kSum, kMax, kLstm };

std::string aggregator_name(AggregatorKind k);
AggregatorKind aggregator_from_name(const std::string& name);

struct GnnConfig {
    uint32_t layer_count = 3;
    uint32_t hidden_dim = 32;
    AggregatorKind aggregator = AggregatorKind::kMean;
};

/// diam(G_n)+1 layers suffice to propagate whole-graph information; an upper
/// bound on useful depth, not a prescription.
inline uint32_t layer_count_for_diameter(uint32_t diam) { return diam + 1; }

/// Dense row-major matrix; vectors are 1-column or 1-row as noted.
struct Tensor {
    uint32_t rows = 0;
    uint32_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(uint32_t r, uint32_t c) : rows(r), cols(c), data(size_t(r) * c, 0.0) {}
    double& at(uint32_t r, uint32_t c) { return data[size_t(r) * cols + c]; }
    double at(uint32_t r, uint32_t c) const { return data[size_t(r) * cols + c]; }
    size_t size() const { return data.size(); }
};

/// LSTM aggregator parameters; gate order is input, forget, cell, output.
struct LstmParams {
    std::array<Tensor, 4> wx;  // d x d
    std::array<Tensor, 4> wh;  // d x d
    std::array<Tensor, 4> b;   // 1 x d
};

struct GnnLayer {
    Tensor combine;  // out_dim x 2*in_dim, no bias
    std::optional<LstmParams> lstm;
};

/// Layered parameters mapping the 3 node features to one scalar per node,
/// interpreted as a predicted log-likelihood.
struct GnnModel {
    GnnConfig config;
    std::vector<GnnLayer> layers;
    Tensor head_weight;  // 1 x hidden_dim
    Tensor head_bias;    // 1 x 1

    /// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
    static GnnModel init(const GnnConfig& config, uint64_t seed);

    uint32_t input_dim_of_layer(uint32_t l) const { return l == 0 ? 3 : config.hidden_dim; }

    /// Fixed-order parameter enumeration, shared by the optimizer, the
    /// serializer and the finite-difference tests.
    std::vector<Tensor*> parameter_list();
    std::vector<const Tensor*> parameter_list() const;
    std::vector<std::string> parameter_names() const;
};

/// Gradient buffers aligned with GnnModel::parameter_list().
struct GnnGradients {
    std::vector<Tensor> tensors;
};

/// L rounds of aggregate-then-combine followed by the linear head. Neighbor
/// sequences for the LSTM aggregator are ordered by descending support
/// degree, then ascending NodeId.
std::vector<double> gnn_forward(const GnnModel& model, const Subgraph& support,
                                const NodeFeatures& features);

/// Sum of squared differences; the same functional form serves both the
/// pre-training loss (approximate labels) and fine-tuning loss (exact labels).
double gnn_loss(std::span<const double> predictions, std::span<const double> labels);

/// Forward + exact reverse-mode backward in one pass. Throws NumericalError
/// on non-finite intermediates. A nonzero lstm_order_seed replaces the
/// deterministic LSTM neighbor order with a seeded shuffle (the GraphSage
/// random-permutation behavior, opt-in per training step).
GnnGradients gnn_gradients(const GnnModel& model, const Subgraph& support,
                           const NodeFeatures& features, std::span<const double> labels,
                           double* loss_out = nullptr, uint64_t lstm_order_seed = 0);

// --- training ---------------------------------------------------------

/// One training example: an epidemic network with features and per-node
/// log-likelihood labels.
struct LabeledGraph {
    std::shared_ptr<const EpidemicNetwork> epidemic;
    Subgraph support;
    ObservedContacts contacts;
    NodeFeatures features;
    std::vector<double> labels;
    std::string provenance;  // approx-eq11 | exact-eq2 | regular-tree-centrality
};

enum class TrainPhase { kPretrain, kFinetune };
enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
    TrainPhase phase = TrainPhase::kPretrain;
    uint32_t epochs = 150;
    double step_size = 1e-3;
    OptimizerKind optimizer = OptimizerKind::kAdam;
    uint64_t seed = 0;
    bool lstm_neighbor_shuffle = false;  // reshuffle LSTM orders each step
};

struct TrainResult {
    std::vector<double> train_loss;       // per-epoch mean per-node squared error
    std::vector<double> validation_loss;  // empty when no validation set given
};

/// Per-graph first-order updates over the shuffled dataset, cfg.epochs times.
/// Deterministic given cfg.seed. Aborts with NumericalError on divergence.
TrainResult train(GnnModel& model, std::span<const LabeledGraph> dataset, const TrainConfig& cfg,
                  std::span<const LabeledGraph> validation = {});

struct TopkResult {
    std::vector<NodeId> ranking;  // best first, ties by ascending NodeId
    uint32_t requested_k = 0;
    uint32_t effective_k = 0;  // clamped to the support size
};

TopkResult predict_topk(const GnnModel& model, const Subgraph& support,
                        const ObservedContacts& contacts, uint32_t k);

/// Tracing estimator backed by a trained model.
StageEstimator make_gnn_estimator(std::shared_ptr<const GnnModel> model);

}  // namespace deeptrace
