#include "deeptrace/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "deeptrace/errors.hpp"
#include "deeptrace/rng.hpp"

namespace deeptrace {

std::filesystem::path resolve_path(const std::filesystem::path& p) {
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("DEEPTRACE_DATA_ROOT")) {
        return std::filesystem::path(root) / p;
    }
    return p;
}

static uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

static std::string hex64(uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

// --- payload conversions -------------------------------------------------

json to_json(const Graph& g) {
    json j;
    j["node_count"] = g.node_count();
    json edges = json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    return j;
}

Graph graph_from_json(const json& j) {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    }
    return Graph::from_edges(j.at("node_count").get<size_t>(), edges);
}

json to_json(const SiConfig& cfg) {
    return {{"stop_fraction", cfg.stop_fraction},
            {"frontier_rule",
             cfg.frontier_rule == FrontierRule::kNodeUniform ? "node-uniform" : "edge-uniform"},
            {"seed", cfg.seed}};
}

SiConfig si_config_from_json(const json& j) {
    SiConfig cfg;
    cfg.stop_fraction = j.at("stop_fraction").get<double>();
    std::string rule = j.at("frontier_rule").get<std::string>();
    if (rule == "node-uniform") {
        cfg.frontier_rule = FrontierRule::kNodeUniform;
    } else if (rule == "edge-uniform") {
        cfg.frontier_rule = FrontierRule::kEdgeUniform;
    } else {
        throw DataError("unknown frontier rule: " + rule);
    }
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

json to_json(const GeneratorSpec& spec) {
    json j;
    j["family"] = family_name(spec.family);
    j["size"] = spec.size;
    j["seed"] = spec.seed;
    switch (spec.family) {
        case GraphFamily::kErdosRenyi: j["edge_probability"] = spec.edge_probability; break;
        case GraphFamily::kBarabasiAlbert: j["attach_count"] = spec.attach_count; break;
        case GraphFamily::kWattsStrogatz:
            j["ring_degree"] = spec.ring_degree;
            j["rewire_probability"] = spec.rewire_probability;
            break;
        case GraphFamily::kRandomRegularTree: j["regular_degree"] = spec.regular_degree; break;
        case GraphFamily::kCompleteNaryTree: j["arity"] = spec.arity; break;
        case GraphFamily::kRandomTree: break;
    }
    return j;
}

GeneratorSpec generator_spec_from_json(const json& j) {
    GeneratorSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.size = j.at("size").get<uint32_t>();
    spec.seed = j.value("seed", uint64_t{0});
    spec.edge_probability = j.value("edge_probability", 0.0);
    spec.attach_count = j.value("attach_count", 0u);
    spec.ring_degree = j.value("ring_degree", 0u);
    spec.rewire_probability = j.value("rewire_probability", 0.0);
    spec.regular_degree = j.value("regular_degree", 0u);
    spec.arity = j.value("arity", 0u);
    return spec;
}

json to_json(const EpidemicNetwork& net) {
    json j;
    j["base"] = to_json(*net.base);
    j["infected"] = net.infected;
    j["config"] = to_json(net.config);
    return j;
}

EpidemicNetwork epidemic_from_json(const json& j) {
    EpidemicNetwork net;
    net.base = std::make_shared<Graph>(graph_from_json(j.at("base")));
    net.infected = j.at("infected").get<std::vector<NodeId>>();
    if (net.infected.empty()) throw DataError("epidemic network without infected nodes");
    net.induced = Subgraph(net.base, net.infected);
    net.config = si_config_from_json(j.at("config"));
    return net;
}

json to_json(const TraceRun& run) {
    return {{"strategy", strategy_name(run.strategy)},
            {"index_case", run.index_case},
            {"order", run.order},
            {"estimates", run.estimates},
            {"estimate_every", run.estimate_every},
            {"seed", run.seed},
            {"estimator", run.estimator}};
}

TraceRun trace_run_from_json(const json& j) {
    TraceRun run;
    run.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    run.index_case = j.at("index_case").get<NodeId>();
    run.order = j.at("order").get<std::vector<NodeId>>();
    run.estimates = j.at("estimates").get<std::vector<NodeId>>();
    run.estimate_every = j.at("estimate_every").get<uint32_t>();
    run.seed = j.at("seed").get<uint64_t>();
    run.estimator = j.value("estimator", std::string{});
    return run;
}

json to_json(const LikelihoodConfig& cfg) {
    return {{"mode", mode_name(cfg.mode)},
            {"universe", universe_name(cfg.universe)},
            {"constant_degree", cfg.constant_degree},
            {"enumeration_cap", cfg.enumeration_cap}};
}

LikelihoodConfig likelihood_config_from_json(const json& j) {
    LikelihoodConfig cfg;
    cfg.mode = mode_from_name(j.at("mode").get<std::string>());
    cfg.universe = universe_from_name(j.at("universe").get<std::string>());
    cfg.constant_degree = j.at("constant_degree").get<uint32_t>();
    cfg.enumeration_cap = j.at("enumeration_cap").get<uint64_t>();
    return cfg;
}

json to_json(const SourceScores& scores) {
    return {{"nodes", scores.nodes},
            {"log_scores", scores.log_scores},
            {"argmax", scores.argmax},
            {"estimator", scores.estimator},
            {"config", to_json(scores.config)},
            {"notes", scores.notes}};
}

SourceScores source_scores_from_json(const json& j) {
    SourceScores scores;
    scores.nodes = j.at("nodes").get<std::vector<NodeId>>();
    scores.log_scores = j.at("log_scores").get<std::vector<double>>();
    scores.argmax = j.at("argmax").get<std::vector<NodeId>>();
    scores.estimator = j.at("estimator").get<std::string>();
    scores.config = likelihood_config_from_json(j.at("config"));
    scores.notes = j.value("notes", std::string{});
    return scores;
}

json to_json(const GnnModel& model) {
    json j;
    j["config"] = {{"layer_count", model.config.layer_count},
                   {"hidden_dim", model.config.hidden_dim},
                   {"aggregator", aggregator_name(model.config.aggregator)}};
    json tensors = json::array();
    auto params = model.parameter_list();
    auto names = model.parameter_names();
    for (size_t i = 0; i < params.size(); ++i) {
        tensors.push_back({{"name", names[i]},
                           {"rows", params[i]->rows},
                           {"cols", params[i]->cols},
                           {"data", params[i]->data}});
    }
    j["tensors"] = std::move(tensors);
    return j;
}

GnnModel gnn_model_from_json(const json& j) {
    GnnConfig config;
    config.layer_count = j.at("config").at("layer_count").get<uint32_t>();
    config.hidden_dim = j.at("config").at("hidden_dim").get<uint32_t>();
    config.aggregator = aggregator_from_name(j.at("config").at("aggregator").get<std::string>());
    GnnModel model = GnnModel::init(config, 0);
    auto params = model.parameter_list();
    auto names = model.parameter_names();
    const json& tensors = j.at("tensors");
    if (tensors.size() != params.size()) {
        throw DataError("model file has " + std::to_string(tensors.size()) +
                        " tensors, expected " + std::to_string(params.size()));
    }
    for (size_t i = 0; i < params.size(); ++i) {
        const json& t = tensors[i];
        if (t.at("name").get<std::string>() != names[i] ||
            t.at("rows").get<uint32_t>() != params[i]->rows ||
            t.at("cols").get<uint32_t>() != params[i]->cols) {
            throw DataError("model tensor mismatch at " + names[i]);
        }
        params[i]->data = t.at("data").get<std::vector<double>>();
        if (params[i]->data.size() != size_t(params[i]->rows) * params[i]->cols) {
            throw DataError("model tensor size mismatch at " + names[i]);
        }
    }
    return model;
}

json to_json(const EvalReport& report) {
    return {{"metric", report.metric},
            {"value", report.value},
            {"breakdown", report.breakdown},
            {"config_snapshot", report.config_snapshot}};
}

EvalReport eval_report_from_json(const json& j) {
    EvalReport report;
    report.metric = j.at("metric").get<std::string>();
    report.value = j.at("value").get<double>();
    report.breakdown = j.at("breakdown").get<std::vector<double>>();
    report.config_snapshot = j.value("config_snapshot", std::string{});
    return report;
}

// --- container files -------------------------------------------------------

static constexpr int kFormatVersion = 1;

void save_artifact(const std::filesystem::path& path, const std::string& kind,
                   const json& payload) {
    json container;
    container["format"] = "deeptrace/" + kind;
    container["version"] = kFormatVersion;
    container["checksum"] = hex64(fnv1a64(payload.dump()));
    container["payload"] = payload;

    std::filesystem::path full = resolve_path(path);
    if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full);
    if (!out) throw DataError("cannot write " + full.string());
    out << container.dump(2) << "\n";
}

json load_artifact(const std::filesystem::path& path, const std::string& kind) {
    std::filesystem::path full = resolve_path(path);
    std::ifstream in(full);
    if (!in) throw DataError("cannot read " + full.string());
    json container;
    try {
        in >> container;
    } catch (const json::exception& e) {
        throw DataError(full.string() + ": corrupt JSON (" + e.what() + ")");
    }
    std::string expected = "deeptrace/" + kind;
    if (container.value("format", std::string{}) != expected) {
        throw DataError(full.string() + ": format is not " + expected);
    }
    if (container.value("version", -1) != kFormatVersion) {
        throw DataError(full.string() + ": unsupported version");
    }
    const json& payload = container.at("payload");
    if (container.value("checksum", std::string{}) != hex64(fnv1a64(payload.dump()))) {
        throw DataError(full.string() + ": checksum mismatch");
    }
    return payload;
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
    save_artifact(path, "graph", to_json(g));
}
Graph load_graph(const std::filesystem::path& path) {
    return graph_from_json(load_artifact(path, "graph"));
}

void save_epidemic(const std::filesystem::path& path, const EpidemicNetwork& net) {
    save_artifact(path, "epidemic", to_json(net));
}
EpidemicNetwork load_epidemic(const std::filesystem::path& path) {
    return epidemic_from_json(load_artifact(path, "epidemic"));
}

void save_trace_run(const std::filesystem::path& path, const TraceRun& run) {
    save_artifact(path, "trace-run", to_json(run));
}
TraceRun load_trace_run(const std::filesystem::path& path) {
    return trace_run_from_json(load_artifact(path, "trace-run"));
}

void save_scores(const std::filesystem::path& path, const SourceScores& scores) {
    save_artifact(path, "scores", to_json(scores));
}
SourceScores load_scores(const std::filesystem::path& path) {
    return source_scores_from_json(load_artifact(path, "scores"));
}

void save_model(const std::filesystem::path& path, const GnnModel& model) {
    save_artifact(path, "model", to_json(model));
}
GnnModel load_model(const std::filesystem::path& path) {
    return gnn_model_from_json(load_artifact(path, "model"));
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
    save_artifact(path, "report", to_json(report));
}
EvalReport load_report(const std::filesystem::path& path) {
    return eval_report_from_json(load_artifact(path, "report"));
}

// --- binary graph format ----------------------------------------------------

static void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
static void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
static uint32_t get_u32(const std::string& in, size_t& pos) {
    if (pos + 4 > in.size()) throw DataError("binary graph: truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(in[pos++])) << (8 * i);
    return v;
}
static uint64_t get_u64(const std::string& in, size_t& pos) {
    if (pos + 8 > in.size()) throw DataError("binary graph: truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(in[pos++])) << (8 * i);
    return v;
}

void save_graph_binary(const std::filesystem::path& path, const Graph& g) {
    std::string buffer = "DTG1";
    put_u32(buffer, static_cast<uint32_t>(g.node_count()));
    put_u32(buffer, static_cast<uint32_t>(g.edge_count()));
    for (const auto& [u, v] : g.edges()) {
        put_u32(buffer, u);
        put_u32(buffer, v);
    }
    put_u64(buffer, fnv1a64(buffer));

    std::filesystem::path full = resolve_path(path);
    if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary);
    if (!out) throw DataError("cannot write " + full.string());
    out.write(buffer.data(), std::streamsize(buffer.size()));
}

Graph load_graph_binary(const std::filesystem::path& path) {
    std::filesystem::path full = resolve_path(path);
    std::ifstream in(full, std::ios::binary);
    if (!in) throw DataError("cannot read " + full.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string buffer = ss.str();
    if (buffer.size() < 12 || buffer.substr(0, 4) != "DTG1") {
        throw DataError(full.string() + ": not a binary graph file");
    }
    uint64_t stored = 0;
    {
        size_t pos = buffer.size() - 8;
        stored = get_u64(buffer, pos);
    }
    if (stored != fnv1a64(std::string_view(buffer).substr(0, buffer.size() - 8))) {
        throw DataError(full.string() + ": checksum mismatch");
    }
    size_t pos = 4;
    uint32_t n = get_u32(buffer, pos);
    uint32_t m = get_u32(buffer, pos);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (uint32_t i = 0; i < m; ++i) {
        NodeId u = get_u32(buffer, pos);
        NodeId v = get_u32(buffer, pos);
        edges.emplace_back(u, v);
    }
    return Graph::from_edges(n, edges);
}

// --- cluster records ---------------------------------------------------------

ClusterRecord read_cluster(const std::filesystem::path& path) {
    std::filesystem::path full = resolve_path(path);
    std::ifstream in(full);
    if (!in) throw DataError("cannot read " + full.string());

    ClusterRecord record;
    std::vector<std::string> known;
    auto is_known = [&](const std::string& id) {
        return std::find(known.begin(), known.end(), id) != known.end();
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string keyword;
        if (!(ss >> keyword)) continue;
        auto fail = [&](const std::string& message) -> DataError {
            return DataError(full.string() + ":" + std::to_string(line_no) + ": " + message);
        };
        if (keyword == "case") {
            std::string id;
            if (!(ss >> id)) throw fail("case needs an id");
            if (is_known(id)) throw fail("duplicate case " + id);
            known.push_back(id);
            record.cases.push_back(id);
        } else if (keyword == "edge") {
            std::string a, b;
            if (!(ss >> a >> b)) throw fail("edge needs two ids");
            if (!is_known(a)) throw fail("edge references undeclared case " + a);
            if (!is_known(b)) throw fail("edge references undeclared case " + b);
            record.edges.emplace_back(a, b);
        } else if (keyword == "order") {
            std::string id;
            int rank;
            if (!(ss >> id >> rank)) throw fail("order needs an id and an integer");
            if (!is_known(id)) throw fail("order references undeclared case " + id);
            record.order.emplace_back(id, rank);
        } else if (keyword == "source") {
            std::string id;
            if (!(ss >> id)) throw fail("source needs an id");
            if (!is_known(id)) throw fail("source references undeclared case " + id);
            if (record.source.has_value()) throw fail("duplicate source marker");
            record.source = id;
        } else {
            throw fail("unknown keyword " + keyword);
        }
    }
    if (record.cases.empty()) {
        throw DataError(full.string() + ": empty cluster record (no cases)");
    }
    return record;
}

void write_cluster(const std::filesystem::path& path, const ClusterRecord& record) {
    std::filesystem::path full = resolve_path(path);
    if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full);
    if (!out) throw DataError("cannot write " + full.string());
    for (const auto& id : record.cases) out << "case " << id << "\n";
    for (const auto& [a, b] : record.edges) out << "edge " << a << " " << b << "\n";
    for (const auto& [id, rank] : record.order) out << "order " << id << " " << rank << "\n";
    if (record.source) out << "source " << *record.source << "\n";
}

std::pair<Graph, std::vector<std::string>> ClusterRecord::to_graph() const {
    std::vector<std::string> labels = cases;
    auto id_of = [&](const std::string& name) -> NodeId {
        auto it = std::find(labels.begin(), labels.end(), name);
        return static_cast<NodeId>(it - labels.begin());
    };
    std::vector<Edge> graph_edges;
    graph_edges.reserve(edges.size());
    for (const auto& [a, b] : edges) graph_edges.emplace_back(id_of(a), id_of(b));
    return {Graph::from_edges(labels.size(), graph_edges), labels};
}

// --- dataset generation --------------------------------------------------------

std::string annotator_name(LabelAnnotator a) {
    switch (a) {
        case LabelAnnotator::kApproxEq11: return "approx-eq11";
        case LabelAnnotator::kExactEq2: return "exact-eq2";
        case LabelAnnotator::kRegularTreeCentrality: return "regular-tree-centrality";
    }
    throw DataError("unknown annotator");
}

LabelAnnotator annotator_from_name(const std::string& name) {
    if (name == "approx-eq11") return LabelAnnotator::kApproxEq11;
    if (name == "exact-eq2") return LabelAnnotator::kExactEq2;
    if (name == "regular-tree-centrality") return LabelAnnotator::kRegularTreeCentrality;
    throw DataError("unknown annotator: " + name);
}

static json to_json(const SplitSpec& split) {
    json families = json::array();
    for (GraphFamily f : split.families) families.push_back(family_name(f));
    return {{"count", split.count},
            {"infected_min", split.infected_min},
            {"infected_max", split.infected_max},
            {"families", families},
            {"annotator", annotator_name(split.annotator)},
            {"annotator_samples", split.annotator_samples},
            {"regular_degree", split.regular_degree}};
}

static SplitSpec split_from_json(const json& j) {
    SplitSpec split;
    split.count = j.at("count").get<uint32_t>();
    split.infected_min = j.at("infected_min").get<uint32_t>();
    split.infected_max = j.at("infected_max").get<uint32_t>();
    for (const auto& f : j.at("families")) {
        split.families.push_back(family_from_name(f.get<std::string>()));
    }
    split.annotator = annotator_from_name(j.at("annotator").get<std::string>());
    split.annotator_samples = j.value("annotator_samples", 100u);
    split.regular_degree = j.value("regular_degree", 3u);
    return split;
}

json to_json(const DatasetManifest& manifest) {
    return {{"seed", manifest.seed},
            {"si", to_json(manifest.si)},
            {"splits",
             {{"pretrain", to_json(manifest.pretrain)},
              {"finetune", to_json(manifest.finetune)},
              {"test", to_json(manifest.test)},
              {"validation", to_json(manifest.validation)}}}};
}

DatasetManifest dataset_manifest_from_json(const json& j) {
    DatasetManifest manifest;
    manifest.seed = j.at("seed").get<uint64_t>();
    manifest.si = si_config_from_json(j.at("si"));
    const json& splits = j.at("splits");
    manifest.pretrain = split_from_json(splits.at("pretrain"));
    manifest.finetune = split_from_json(splits.at("finetune"));
    manifest.test = split_from_json(splits.at("test"));
    manifest.validation = split_from_json(splits.at("validation"));
    return manifest;
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& path) {
    return dataset_manifest_from_json(load_artifact(path, "dataset-manifest"));
}

// Nearest feasible size for a regular tree with the given internal degree.
static uint32_t feasible_regular_size(uint32_t target, uint32_t degree) {
    if (target <= degree + 1) return degree + 1;
    uint32_t over = (target - degree - 1) % (degree - 1);
    return target - over;
}

LabeledGraph annotate(std::shared_ptr<const EpidemicNetwork> epidemic, LabelAnnotator annotator,
                      uint32_t samples, uint32_t regular_degree, uint64_t seed) {
    LabeledGraph example;
    example.epidemic = epidemic;
    example.support = epidemic->induced;
    example.contacts = observe_contacts(*epidemic, example.support);
    example.features = extract_features(example.support, example.contacts);
    example.provenance = annotator_name(annotator);

    const Subgraph& support = example.support;
    DegreeContext ctx{&epidemic->induced};
    switch (annotator) {
        case LabelAnnotator::kApproxEq11: {
            LikelihoodConfig cfg;
            cfg.universe = DegreeUniverse::kObservedContacts;
            example.labels.reserve(support.size());
            for (NodeId v : support.nodes()) {
                Rng rng(derive_seed(seed, "annotate-approx", v));
                example.labels.push_back(
                    approx_rsavr_log(support, v, samples, cfg, ctx, rng, nullptr));
            }
            break;
        }
        case LabelAnnotator::kExactEq2: {
            LikelihoodConfig cfg;
            cfg.universe = DegreeUniverse::kObservedContacts;
            example.labels.reserve(support.size());
            for (NodeId v : support.nodes()) {
                example.labels.push_back(exact_log_likelihood(support, v, cfg, ctx));
            }
            break;
        }
        case LabelAnnotator::kRegularTreeCentrality: {
            if (!support.is_tree()) {
                throw DataError("regular-tree-centrality annotator needs a tree support");
            }
            // Exact log-likelihood under the constant-d universe: the shared
            // per-permutation probability plus the log permutation count.
            std::vector<double> log_counts = log_count_permutations_all(support);
            double common = 0.0;
            size_t n = support.size();
            for (size_t i = 2; i <= n; ++i) {
                common -= std::log(double(i - 1) * regular_degree - 2.0 * double(i - 2));
            }
            example.labels.resize(n);
            for (size_t i = 0; i < n; ++i) example.labels[i] = log_counts[i] + common;
            break;
        }
    }
    return example;
}

static GeneratorSpec default_spec(GraphFamily family, uint32_t size, uint32_t regular_degree,
                                  uint64_t seed) {
    GeneratorSpec spec;
    spec.family = family;
    spec.size = size;
    spec.seed = seed;
    switch (family) {
        case GraphFamily::kErdosRenyi:
            spec.edge_probability = std::min(1.0, std::max(0.015, 2.5 * std::log(double(size)) /
                                                                       double(size)));
            break;
        case GraphFamily::kBarabasiAlbert: spec.attach_count = 2; break;
        case GraphFamily::kWattsStrogatz:
            spec.ring_degree = 4;
            spec.rewire_probability = 0.1;
            break;
        case GraphFamily::kRandomRegularTree: spec.regular_degree = regular_degree; break;
        case GraphFamily::kCompleteNaryTree: spec.arity = 2; break;
        case GraphFamily::kRandomTree: break;
    }
    return spec;
}

static std::vector<LabeledGraph> build_split(const SplitSpec& split, const SiConfig& si,
                                             uint64_t seed, const std::string& name,
                                             std::vector<std::string>& log) {
    std::vector<LabeledGraph> out;
    if (split.count == 0) return out;
    if (split.families.empty()) throw DataError("split " + name + " lists no families");
    if (split.infected_min == 0 || split.infected_max < split.infected_min) {
        throw DataError("split " + name + " has an invalid infected-size range");
    }

    for (uint32_t i = 0; i < split.count; ++i) {
        GraphFamily family = split.families[i % split.families.size()];
        uint64_t instance_seed = derive_seed(seed, name, i);
        uint32_t target = split.infected_min;
        if (split.infected_max > split.infected_min) {
            Rng size_rng(derive_seed(instance_seed, "size"));
            target += static_cast<uint32_t>(
                size_rng.bounded(split.infected_max - split.infected_min + 1));
        }

        for (uint32_t attempt = 0;; ++attempt) {
            if (attempt >= 8) {
                throw DataError("split " + name + " instance " + std::to_string(i) +
                                ": annotation failed after resampling");
            }
            uint64_t attempt_seed = derive_seed(instance_seed, "attempt", attempt);
            try {
                std::shared_ptr<const EpidemicNetwork> net;
                if (split.annotator == LabelAnnotator::kRegularTreeCentrality) {
                    // Fully infected regular trees: the exact-label protocol.
                    GeneratorSpec spec =
                        default_spec(GraphFamily::kRandomRegularTree,
                                     feasible_regular_size(target, split.regular_degree),
                                     split.regular_degree, attempt_seed);
                    Generated gen = generate(spec);
                    SiConfig full = si;
                    full.stop_fraction = 1.0;
                    full.seed = derive_seed(attempt_seed, "si");
                    NodeId source = random_source(*gen.graph, derive_seed(attempt_seed, "src"));
                    net = std::make_shared<EpidemicNetwork>(
                        simulate_si(gen.graph, source, full));
                } else {
                    uint32_t base_size = static_cast<uint32_t>(
                        std::lround(double(target) / si.stop_fraction));
                    GeneratorSpec spec = default_spec(family, std::max(base_size, target),
                                                      split.regular_degree, attempt_seed);
                    Generated gen = generate(spec);
                    if (gen.giant_component_taken) {
                        log.push_back(name + "[" + std::to_string(i) +
                                      "]: giant component substituted");
                    }
                    SiConfig run = si;
                    run.seed = derive_seed(attempt_seed, "si");
                    NodeId source = random_source(*gen.graph, derive_seed(attempt_seed, "src"));
                    net = std::make_shared<EpidemicNetwork>(simulate_si(gen.graph, source, run));
                }
                out.push_back(annotate(net, split.annotator, split.annotator_samples,
                                       split.regular_degree, attempt_seed));
                break;
            } catch (const DataError&) {
                uint32_t shrunk = std::max<uint32_t>(6, target / 2);
                log.push_back(name + "[" + std::to_string(i) + "]: resampled smaller (" +
                              std::to_string(target) + " -> " + std::to_string(shrunk) + ")");
                target = shrunk;
            }
        }
    }
    return out;
}

Dataset build_dataset(const DatasetManifest& manifest) {
    Dataset dataset;
    dataset.pretrain =
        build_split(manifest.pretrain, manifest.si, manifest.seed, "pretrain", dataset.log);
    dataset.finetune =
        build_split(manifest.finetune, manifest.si, manifest.seed, "finetune", dataset.log);
    dataset.test = build_split(manifest.test, manifest.si, manifest.seed, "test", dataset.log);
    dataset.validation =
        build_split(manifest.validation, manifest.si, manifest.seed, "validation", dataset.log);
    return dataset;
}

}  // namespace deeptrace
