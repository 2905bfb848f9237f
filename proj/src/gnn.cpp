#include "deeptrace/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "deeptrace/errors.hpp"
#include "deeptrace/rng.hpp"

namespace deeptrace {

// --- features ---------------------------------------------------------

std::vector<double> degree_ratio(const Subgraph& support, const ObservedContacts& contacts) {
    if (support.size() == 0) throw DataError("degree_ratio: empty support");
    if (contacts.degree_sum_all <= 0.0) throw DataError("degree_ratio: no observed contacts");
    std::vector<double> out(support.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = contacts.observed_degree[i] / contacts.degree_sum_all;
    }
    return out;
}

std::vector<double> infected_proportion(const Subgraph& support, const ObservedContacts& contacts) {
    if (support.size() == 0) throw DataError("infected_proportion: empty support");
    std::vector<double> out(support.size());
    for (size_t i = 0; i < out.size(); ++i) {
        if (contacts.observed_degree[i] == 0) {
            throw DataError("infected_proportion: isolated node " +
                            std::to_string(contacts.nodes[i]));
        }
        out[i] = double(contacts.infected_degree[i]) / double(contacts.observed_degree[i]);
    }
    return out;
}

std::vector<double> boundary_distance_ratio(const Subgraph& support) {
    size_t n = support.size();
    if (n == 0) throw DataError("boundary_distance_ratio: empty support");
    if (n == 1) return {1.0};

    std::vector<NodeId> boundary;
    for (NodeId v : support.nodes()) {
        if (support.degree_in(v) == 1) boundary.push_back(v);
    }
    if (boundary.empty()) {
        // Cycle-like support without leaf nodes: every node is boundary.
        boundary.assign(support.nodes().begin(), support.nodes().end());
    }

    // b(v) = max distance to a boundary node; one BFS per boundary node.
    std::vector<uint32_t> b(n, 0);
    std::vector<uint32_t> dist(n);
    for (NodeId leaf : boundary) {
        std::fill(dist.begin(), dist.end(), RootedTree::kUnreached);
        dist[support.index_of(leaf)] = 0;
        std::queue<NodeId> queue;
        queue.push(leaf);
        while (!queue.empty()) {
            NodeId x = queue.front();
            queue.pop();
            uint32_t dx = dist[support.index_of(x)];
            b[support.index_of(x)] = std::max(b[support.index_of(x)], dx);
            for (NodeId y : support.neighbors_in(x)) {
                uint32_t yp = support.index_of(y);
                if (dist[yp] == RootedTree::kUnreached) {
                    dist[yp] = dx + 1;
                    queue.push(y);
                }
            }
        }
    }
    uint32_t top = *std::max_element(b.begin(), b.end());
    if (top == 0) return std::vector<double>(n, 1.0);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = double(b[i]) / double(top);
    return out;
}

NodeFeatures extract_features(const Subgraph& support, const ObservedContacts& contacts) {
    auto r = degree_ratio(support, contacts);
    auto r_hat = infected_proportion(support, contacts);
    auto r_check = boundary_distance_ratio(support);
    NodeFeatures features;
    features.rows.resize(support.size());
    for (size_t i = 0; i < support.size(); ++i) {
        features.rows[i] = {r[i], r_hat[i], r_check[i]};
    }
    return features;
}

// --- model ------------------------------------------------------------

std::string aggregator_name(AggregatorKind k) {
    switch (k) {
        case AggregatorKind::kMean: return "mean";
        case AggregatorKind::kSum: return "sum";
        case AggregatorKind::kMax: return "max";
        case AggregatorKind::kLstm: return "lstm";
    }
    throw DataError("unknown aggregator");
}

AggregatorKind aggregator_from_name(const std::string& name) {
    if (name == "mean") return AggregatorKind::kMean;
    if (name == "sum") return AggregatorKind::kSum;
    if (name == "max") return AggregatorKind::kMax;
    if (name == "lstm") return AggregatorKind::kLstm;
    throw DataError("unknown aggregator: " + name);
}

static void fill_uniform(Tensor& t, double bound, Rng& rng) {
    for (double& x : t.data) x = (rng.real() * 2.0 - 1.0) * bound;
}

GnnModel GnnModel::init(const GnnConfig& config, uint64_t seed) {
    if (config.layer_count == 0 || config.hidden_dim == 0) {
        throw DataError("gnn: layer_count and hidden_dim must be >= 1");
    }
    Rng rng(derive_seed(seed, "gnn-init"));
    GnnModel model;
    model.config = config;
    for (uint32_t l = 0; l < config.layer_count; ++l) {
        uint32_t in = l == 0 ? 3 : config.hidden_dim;
        uint32_t out = config.hidden_dim;
        GnnLayer layer;
        layer.combine = Tensor(out, 2 * in);
        fill_uniform(layer.combine, std::sqrt(6.0 / double(2 * in + out)), rng);
        if (config.aggregator == AggregatorKind::kLstm) {
            LstmParams lstm;
            double bound = std::sqrt(6.0 / double(in + in));
            for (int g = 0; g < 4; ++g) {
                lstm.wx[g] = Tensor(in, in);
                lstm.wh[g] = Tensor(in, in);
                lstm.b[g] = Tensor(1, in);
                fill_uniform(lstm.wx[g], bound, rng);
                fill_uniform(lstm.wh[g], bound, rng);
            }
            layer.lstm = std::move(lstm);
        }
        model.layers.push_back(std::move(layer));
    }
    model.head_weight = Tensor(1, config.hidden_dim);
    fill_uniform(model.head_weight, std::sqrt(6.0 / double(config.hidden_dim + 1)), rng);
    model.head_bias = Tensor(1, 1);
    return model;
}

std::vector<Tensor*> GnnModel::parameter_list() {
    std::vector<Tensor*> out;
    for (auto& layer : layers) {
        out.push_back(&layer.combine);
        if (layer.lstm) {
            for (int g = 0; g < 4; ++g) out.push_back(&layer.lstm->wx[g]);
            for (int g = 0; g < 4; ++g) out.push_back(&layer.lstm->wh[g]);
            for (int g = 0; g < 4; ++g) out.push_back(&layer.lstm->b[g]);
        }
    }
    out.push_back(&head_weight);
    out.push_back(&head_bias);
    return out;
}

std::vector<const Tensor*> GnnModel::parameter_list() const {
    auto mutable_list = const_cast<GnnModel*>(this)->parameter_list();
    return {mutable_list.begin(), mutable_list.end()};
}

std::vector<std::string> GnnModel::parameter_names() const {
    static const char* kGate[4] = {"i", "f", "g", "o"};
    std::vector<std::string> out;
    for (size_t l = 0; l < layers.size(); ++l) {
        std::string prefix = "layer" + std::to_string(l) + "/";
        out.push_back(prefix + "combine");
        if (layers[l].lstm) {
            for (int g = 0; g < 4; ++g) out.push_back(prefix + "lstm_wx_" + kGate[g]);
            for (int g = 0; g < 4; ++g) out.push_back(prefix + "lstm_wh_" + kGate[g]);
            for (int g = 0; g < 4; ++g) out.push_back(prefix + "lstm_b_" + kGate[g]);
        }
    }
    out.push_back("head/weight");
    out.push_back("head/bias");
    return out;
}

// --- forward / backward ------------------------------------------------

namespace {

using Vec = std::vector<double>;

void matvec(const Tensor& w, std::span<const double> x, Vec& out) {
    out.assign(w.rows, 0.0);
    for (uint32_t r = 0; r < w.rows; ++r) {
        const double* row = w.data.data() + size_t(r) * w.cols;
        double acc = 0.0;
        for (uint32_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

// grad_w += dz * x^T
void outer_acc(Tensor& grad_w, std::span<const double> dz, std::span<const double> x) {
    for (uint32_t r = 0; r < grad_w.rows; ++r) {
        double* row = grad_w.data.data() + size_t(r) * grad_w.cols;
        double d = dz[r];
        for (uint32_t c = 0; c < grad_w.cols; ++c) row[c] += d * x[c];
    }
}

// dx += w^T * dz
void matvec_transposed_acc(const Tensor& w, std::span<const double> dz, Vec& dx) {
    for (uint32_t r = 0; r < w.rows; ++r) {
        const double* row = w.data.data() + size_t(r) * w.cols;
        double d = dz[r];
        for (uint32_t c = 0; c < w.cols; ++c) dx[c] += row[c] * d;
    }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmStepCache {
    Vec i, f, g, o, c, tanh_c, h;
};

struct LstmNodeCache {
    std::vector<LstmStepCache> steps;
};

struct LayerCache {
    std::vector<Vec> input;       // h^{l-1}, per node
    std::vector<Vec> aggregated;  // per node
    std::vector<Vec> pre;         // z before relu
    std::vector<Vec> output;      // relu(z)
    std::vector<LstmNodeCache> lstm;
    std::vector<std::vector<uint32_t>> max_source;  // per node, per component
};

// Deterministic LSTM consumption order: descending support degree, then
// ascending NodeId. Positions into support.nodes(). A shuffle generator
// replaces the deterministic order with a random permutation per node.
std::vector<std::vector<uint32_t>> neighbor_orders(const Subgraph& support,
                                                   Rng* shuffle = nullptr) {
    std::vector<std::vector<uint32_t>> orders(support.size());
    auto nodes = support.nodes();
    for (size_t i = 0; i < nodes.size(); ++i) {
        auto row = support.neighbors_in(nodes[i]);
        std::vector<uint32_t> order(row.size());
        for (size_t j = 0; j < row.size(); ++j) order[j] = support.index_of(row[j]);
        if (shuffle != nullptr) {
            shuffle->shuffle(order);
        } else {
            std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
                size_t da = support.degree_in(nodes[a]);
                size_t db = support.degree_in(nodes[b]);
                if (da != db) return da > db;
                return nodes[a] < nodes[b];
            });
        }
        orders[i] = std::move(order);
    }
    return orders;
}

void check_finite(std::span<const double> values, uint32_t layer, const char* what) {
    for (double x : values) {
        if (!std::isfinite(x)) {
            throw NumericalError("gnn: non-finite " + std::string(what) + " at layer " +
                                 std::to_string(layer));
        }
    }
}

std::vector<double> forward_internal(const GnnModel& model, const Subgraph& support,
                                     const NodeFeatures& features,
                                     const std::vector<std::vector<uint32_t>>& orders,
                                     std::vector<LayerCache>* caches) {
    size_t n = support.size();
    if (features.rows.size() != n) throw DataError("gnn_forward: feature rows != support size");

    std::vector<Vec> h(n);
    for (size_t i = 0; i < n; ++i) h[i] = {features.rows[i].begin(), features.rows[i].end()};

    for (uint32_t l = 0; l < model.config.layer_count; ++l) {
        const GnnLayer& layer = model.layers[l];
        uint32_t in = model.input_dim_of_layer(l);
        LayerCache cache;
        cache.input = h;
        cache.aggregated.resize(n);
        cache.pre.resize(n);
        cache.output.resize(n);
        if (layer.lstm) cache.lstm.resize(n);
        if (model.config.aggregator == AggregatorKind::kMax) cache.max_source.resize(n);

        std::vector<Vec> next(n);
        for (size_t v = 0; v < n; ++v) {
            const auto& order = orders[v];
            Vec agg(in, 0.0);
            switch (model.config.aggregator) {
                case AggregatorKind::kMean:
                case AggregatorKind::kSum: {
                    for (uint32_t u : order) {
                        for (uint32_t c = 0; c < in; ++c) agg[c] += h[u][c];
                    }
                    if (model.config.aggregator == AggregatorKind::kMean && !order.empty()) {
                        for (double& x : agg) x /= double(order.size());
                    }
                    break;
                }
                case AggregatorKind::kMax: {
                    std::vector<uint32_t> source(in, 0);
                    if (!order.empty()) {
                        for (uint32_t c = 0; c < in; ++c) agg[c] = h[order[0]][c];
                        for (uint32_t j = 1; j < order.size(); ++j) {
                            for (uint32_t c = 0; c < in; ++c) {
                                if (h[order[j]][c] > agg[c]) {
                                    agg[c] = h[order[j]][c];
                                    source[c] = j;
                                }
                            }
                        }
                    }
                    cache.max_source[v] = std::move(source);
                    break;
                }
                case AggregatorKind::kLstm: {
                    const LstmParams& p = *layer.lstm;
                    Vec state_h(in, 0.0), state_c(in, 0.0);
                    LstmNodeCache node_cache;
                    node_cache.steps.reserve(order.size());
                    Vec zi, zf, zg, zo;
                    for (uint32_t u : order) {
                        matvec(p.wx[0], h[u], zi);
                        matvec(p.wx[1], h[u], zf);
                        matvec(p.wx[2], h[u], zg);
                        matvec(p.wx[3], h[u], zo);
                        Vec ri, rf, rg, ro;
                        matvec(p.wh[0], state_h, ri);
                        matvec(p.wh[1], state_h, rf);
                        matvec(p.wh[2], state_h, rg);
                        matvec(p.wh[3], state_h, ro);
                        LstmStepCache step;
                        step.i.resize(in); step.f.resize(in); step.g.resize(in);
                        step.o.resize(in); step.c.resize(in); step.tanh_c.resize(in);
                        step.h.resize(in);
                        for (uint32_t c = 0; c < in; ++c) {
                            step.i[c] = sigmoid(zi[c] + ri[c] + p.b[0].data[c]);
                            step.f[c] = sigmoid(zf[c] + rf[c] + p.b[1].data[c]);
                            step.g[c] = std::tanh(zg[c] + rg[c] + p.b[2].data[c]);
                            step.o[c] = sigmoid(zo[c] + ro[c] + p.b[3].data[c]);
                            step.c[c] = step.f[c] * state_c[c] + step.i[c] * step.g[c];
                            step.tanh_c[c] = std::tanh(step.c[c]);
                            step.h[c] = step.o[c] * step.tanh_c[c];
                        }
                        state_c = step.c;
                        state_h = step.h;
                        node_cache.steps.push_back(std::move(step));
                    }
                    agg = state_h;
                    cache.lstm[v] = std::move(node_cache);
                    break;
                }
            }

            Vec concat(2 * in);
            std::copy(h[v].begin(), h[v].end(), concat.begin());
            std::copy(agg.begin(), agg.end(), concat.begin() + in);
            Vec z;
            matvec(layer.combine, concat, z);
            Vec out(z.size());
            for (size_t c = 0; c < z.size(); ++c) out[c] = std::max(0.0, z[c]);

            cache.aggregated[v] = std::move(agg);
            cache.pre[v] = std::move(z);
            cache.output[v] = out;
            next[v] = std::move(out);
        }
        for (const Vec& row : next) check_finite(row, l, "activation");
        if (caches != nullptr) caches->push_back(std::move(cache));
        h = std::move(next);
    }

    std::vector<double> predictions(n);
    for (size_t v = 0; v < n; ++v) {
        double acc = model.head_bias.data[0];
        for (uint32_t c = 0; c < model.config.hidden_dim; ++c) {
            acc += model.head_weight.data[c] * h[v][c];
        }
        if (!std::isfinite(acc)) throw NumericalError("gnn: non-finite prediction");
        predictions[v] = acc;
    }
    return predictions;
}

GnnGradients zero_gradients(const GnnModel& model) {
    GnnGradients grads;
    for (const Tensor* p : model.parameter_list()) {
        grads.tensors.emplace_back(p->rows, p->cols);
    }
    return grads;
}

}  // namespace

std::vector<double> gnn_forward(const GnnModel& model, const Subgraph& support,
                                const NodeFeatures& features) {
    auto orders = neighbor_orders(support);
    return forward_internal(model, support, features, orders, nullptr);
}

double gnn_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) {
        throw DataError("gnn_loss: prediction/label length mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - labels[i];
        acc += d * d;
    }
    return acc;
}

GnnGradients gnn_gradients(const GnnModel& model, const Subgraph& support,
                           const NodeFeatures& features, std::span<const double> labels,
                           double* loss_out) {
    size_t n = support.size();
    auto orders = neighbor_orders(support);
    std::vector<LayerCache> caches;
    caches.reserve(model.config.layer_count);
    std::vector<double> predictions = forward_internal(model, support, features, orders, &caches);
    if (labels.size() != n) throw DataError("gnn_gradients: label length mismatch");

    double loss = gnn_loss(predictions, labels);
    if (!std::isfinite(loss)) throw NumericalError("gnn_gradients: non-finite loss");
    if (loss_out != nullptr) *loss_out = loss;

    GnnGradients grads = zero_gradients(model);
    // Gradient tensor layout matches parameter_list(): per layer the combine
    // then the lstm blocks, finally the head.
    size_t slot = 0;
    std::vector<size_t> combine_slot(model.config.layer_count);
    std::vector<size_t> lstm_slot(model.config.layer_count, 0);
    for (uint32_t l = 0; l < model.config.layer_count; ++l) {
        combine_slot[l] = slot++;
        if (model.layers[l].lstm) {
            lstm_slot[l] = slot;
            slot += 12;
        }
    }
    size_t head_w_slot = slot;
    size_t head_b_slot = slot + 1;

    uint32_t hidden = model.config.hidden_dim;
    std::vector<Vec> dh(n, Vec(hidden, 0.0));
    const auto& last = caches.back().output;
    for (size_t v = 0; v < n; ++v) {
        double dpred = 2.0 * (predictions[v] - labels[v]);
        grads.tensors[head_b_slot].data[0] += dpred;
        for (uint32_t c = 0; c < hidden; ++c) {
            grads.tensors[head_w_slot].data[c] += dpred * last[v][c];
            dh[v][c] = dpred * model.head_weight.data[c];
        }
    }

    for (uint32_t l = model.config.layer_count; l-- > 0;) {
        const GnnLayer& layer = model.layers[l];
        const LayerCache& cache = caches[l];
        uint32_t in = model.input_dim_of_layer(l);
        std::vector<Vec> dh_prev(n, Vec(in, 0.0));

        for (size_t v = 0; v < n; ++v) {
            const auto& order = orders[v];
            Vec dz(cache.pre[v].size());
            for (size_t c = 0; c < dz.size(); ++c) {
                dz[c] = cache.pre[v][c] > 0.0 ? dh[v][c] : 0.0;
            }

            Vec concat(2 * in);
            std::copy(cache.input[v].begin(), cache.input[v].end(), concat.begin());
            std::copy(cache.aggregated[v].begin(), cache.aggregated[v].end(),
                      concat.begin() + in);
            outer_acc(grads.tensors[combine_slot[l]], dz, concat);

            Vec dconcat(2 * in, 0.0);
            matvec_transposed_acc(layer.combine, dz, dconcat);
            for (uint32_t c = 0; c < in; ++c) dh_prev[v][c] += dconcat[c];
            std::span<const double> da(dconcat.data() + in, in);

            switch (model.config.aggregator) {
                case AggregatorKind::kMean: {
                    if (order.empty()) break;
                    double scale = 1.0 / double(order.size());
                    for (uint32_t u : order) {
                        for (uint32_t c = 0; c < in; ++c) dh_prev[u][c] += da[c] * scale;
                    }
                    break;
                }
                case AggregatorKind::kSum: {
                    for (uint32_t u : order) {
                        for (uint32_t c = 0; c < in; ++c) dh_prev[u][c] += da[c];
                    }
                    break;
                }
                case AggregatorKind::kMax: {
                    if (order.empty()) break;
                    for (uint32_t c = 0; c < in; ++c) {
                        dh_prev[order[cache.max_source[v][c]]][c] += da[c];
                    }
                    break;
                }
                case AggregatorKind::kLstm: {
                    const LstmParams& p = *layer.lstm;
                    const auto& steps = cache.lstm[v].steps;
                    if (steps.empty()) break;
                    Tensor* g_wx = &grads.tensors[lstm_slot[l]];
                    Tensor* g_wh = g_wx + 4;
                    Tensor* g_b = g_wh + 4;

                    Vec dht(da.begin(), da.end());
                    Vec dct(in, 0.0);
                    for (size_t t = steps.size(); t-- > 0;) {
                        const LstmStepCache& s = steps[t];
                        std::span<const double> c_prev =
                            t == 0 ? std::span<const double>() : std::span<const double>(steps[t - 1].c);
                        std::span<const double> h_prev_state =
                            t == 0 ? std::span<const double>() : std::span<const double>(steps[t - 1].h);

                        Vec dzi(in), dzf(in), dzg(in), dzo(in);
                        for (uint32_t c = 0; c < in; ++c) {
                            double dout = dht[c] * s.tanh_c[c];
                            double dc = dct[c] + dht[c] * s.o[c] * (1.0 - s.tanh_c[c] * s.tanh_c[c]);
                            double di = dc * s.g[c];
                            double df = dc * (t == 0 ? 0.0 : c_prev[c]);
                            double dg = dc * s.i[c];
                            dzi[c] = di * s.i[c] * (1.0 - s.i[c]);
                            dzf[c] = df * s.f[c] * (1.0 - s.f[c]);
                            dzg[c] = dg * (1.0 - s.g[c] * s.g[c]);
                            dzo[c] = dout * s.o[c] * (1.0 - s.o[c]);
                            dct[c] = dc * s.f[c];
                        }

                        const Vec& x_t = cache.input[order[t]];
                        Vec dx(in, 0.0);
                        Vec dh_state(in, 0.0);
                        const Vec* dzs[4] = {&dzi, &dzf, &dzg, &dzo};
                        for (int g = 0; g < 4; ++g) {
                            outer_acc(g_wx[g], *dzs[g], x_t);
                            if (t > 0) outer_acc(g_wh[g], *dzs[g], h_prev_state);
                            for (uint32_t c = 0; c < in; ++c) g_b[g].data[c] += (*dzs[g])[c];
                            matvec_transposed_acc(p.wx[g], *dzs[g], dx);
                            matvec_transposed_acc(p.wh[g], *dzs[g], dh_state);
                        }
                        for (uint32_t c = 0; c < in; ++c) dh_prev[order[t]][c] += dx[c];
                        dht = std::move(dh_state);
                    }
                    break;
                }
            }
        }
        dh = std::move(dh_prev);
    }
    return grads;
}

// --- training ---------------------------------------------------------

TrainResult train(GnnModel& model, std::span<const LabeledGraph> dataset, const TrainConfig& cfg,
                  std::span<const LabeledGraph> validation) {
    if (cfg.step_size <= 0.0) throw DataError("train: step size must be positive");
    TrainResult result;
    if (dataset.empty()) throw DataError("train: empty dataset");

    auto params = model.parameter_list();
    std::vector<Tensor> adam_m, adam_v;
    if (cfg.optimizer == OptimizerKind::kAdam) {
        for (const Tensor* p : params) {
            adam_m.emplace_back(p->rows, p->cols);
            adam_v.emplace_back(p->rows, p->cols);
        }
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    uint64_t step = 0;

    std::vector<size_t> indices(dataset.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;

    for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, "epoch", epoch));
        shuffle_rng.shuffle(indices);

        double loss_sum = 0.0;
        size_t node_sum = 0;
        for (size_t idx : indices) {
            const LabeledGraph& example = dataset[idx];
            double graph_loss = 0.0;
            GnnGradients grads = gnn_gradients(model, example.support, example.features,
                                               example.labels, &graph_loss);
            if (!std::isfinite(graph_loss)) {
                throw NumericalError("train: diverged at epoch " + std::to_string(epoch));
            }
            loss_sum += graph_loss;
            node_sum += example.labels.size();

            ++step;
            if (cfg.optimizer == OptimizerKind::kAdam) {
                double bc1 = 1.0 - std::pow(beta1, double(step));
                double bc2 = 1.0 - std::pow(beta2, double(step));
                for (size_t p = 0; p < params.size(); ++p) {
                    auto& m = adam_m[p].data;
                    auto& v = adam_v[p].data;
                    auto& g = grads.tensors[p].data;
                    auto& w = params[p]->data;
                    for (size_t i = 0; i < w.size(); ++i) {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                        w[i] -= cfg.step_size * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
                    }
                }
            } else {
                for (size_t p = 0; p < params.size(); ++p) {
                    auto& g = grads.tensors[p].data;
                    auto& w = params[p]->data;
                    for (size_t i = 0; i < w.size(); ++i) w[i] -= cfg.step_size * g[i];
                }
            }
        }
        result.train_loss.push_back(loss_sum / double(node_sum));

        if (!validation.empty()) {
            double val_sum = 0.0;
            size_t val_nodes = 0;
            for (const LabeledGraph& example : validation) {
                auto preds = gnn_forward(model, example.support, example.features);
                val_sum += gnn_loss(preds, example.labels);
                val_nodes += example.labels.size();
            }
            result.validation_loss.push_back(val_sum / double(val_nodes));
        }
    }
    return result;
}

TopkResult predict_topk(const GnnModel& model, const Subgraph& support,
                        const ObservedContacts& contacts, uint32_t k) {
    NodeFeatures features = extract_features(support, contacts);
    std::vector<double> preds = gnn_forward(model, support, features);

    std::vector<uint32_t> order(support.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    auto nodes = support.nodes();
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (preds[a] != preds[b]) return preds[a] > preds[b];
        return nodes[a] < nodes[b];
    });

    TopkResult result;
    result.requested_k = k;
    result.effective_k = static_cast<uint32_t>(std::min<size_t>(k, support.size()));
    result.ranking.reserve(result.effective_k);
    for (uint32_t i = 0; i < result.effective_k; ++i) result.ranking.push_back(nodes[order[i]]);
    return result;
}

StageEstimator make_gnn_estimator(std::shared_ptr<const GnnModel> model) {
    return [model = std::move(model)](const TraceSnapshot& snapshot) -> NodeId {
        TopkResult top = predict_topk(*model, snapshot.support, snapshot.contacts, 1);
        return top.ranking.front();
    };
}

}  // namespace deeptrace
