// deeptrace: experiment harness for epidemic-source inference over
// contact-tracing networks. Subcommands mirror the pipeline stages:
// generate, spread, trace, estimate, train, evaluate, export, pipeline.
//
// Every subcommand is a pure function of (inputs, flags, seed); reruns
// produce byte-identical outputs. Exit codes: 0 success, 1 usage,
// 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "deeptrace/data_io.hpp"
#include "deeptrace/errors.hpp"
#include "deeptrace/gnn.hpp"
#include "deeptrace/likelihood.hpp"
#include "deeptrace/metrics.hpp"
#include "deeptrace/tracing.hpp"

using namespace deeptrace;
namespace fs = std::filesystem;

namespace {

// Deterministic parallel map: results land by index, seeds are pre-derived.
void parallel_for(size_t count, unsigned jobs, const std::function<void(size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<size_t>(jobs, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct EstimatorChoice {
    std::string name = "rumor";
    uint32_t samples = 100;
    std::string universe = "observed-contacts";
    std::string mode = "exact-boundary";
    uint32_t constant_degree = 0;
    std::string model_path;
    std::shared_ptr<const GnnModel> model;

    LikelihoodConfig likelihood_config() const {
        LikelihoodConfig cfg;
        cfg.mode = mode_from_name(mode);
        cfg.universe = universe_from_name(universe);
        cfg.constant_degree = constant_degree;
        return cfg;
    }

    void load_model_if_needed() {
        if (name == "gnn" && !model) {
            if (model_path.empty()) throw DataError("estimator gnn needs --model");
            model = std::make_shared<GnnModel>(load_model(model_path));
        }
    }

    StageEstimator stage_estimator() {
        load_model_if_needed();
        if (name == "exact") return make_exact_estimator(likelihood_config());
        if (name == "centroid") return make_centroid_estimator();
        if (name == "rumor") return make_rumor_centrality_estimator();
        if (name == "gnn") return make_gnn_estimator(model);
        return make_sampling_estimator(name, samples, likelihood_config());
    }

    SourceScores score_network(const EpidemicNetwork& net, uint64_t seed) {
        load_model_if_needed();
        const Subgraph& support = net.induced;
        DegreeContext ctx{&net.induced};
        if (name == "exact") {
            return exact_mle(support, likelihood_config(), ctx);
        }
        if (name == "rumor" || name == "centroid") {
            SourceScores scores;
            scores.nodes.assign(support.nodes().begin(), support.nodes().end());
            scores.log_scores = log_count_permutations_all(support);
            scores.estimator = "rumor";
            finish_argmax(scores);
            return scores;
        }
        if (name == "gnn") {
            ObservedContacts contacts = observe_contacts(net, support);
            NodeFeatures feats = extract_features(support, contacts);
            SourceScores scores;
            scores.nodes.assign(support.nodes().begin(), support.nodes().end());
            scores.log_scores = gnn_forward(*model, support, feats);
            scores.estimator = "gnn";
            finish_argmax(scores);
            return scores;
        }
        return approx_scores(support, name, samples, likelihood_config(), ctx, seed);
    }

    static void finish_argmax(SourceScores& scores) {
        double best = kNegInf;
        for (double s : scores.log_scores) best = std::max(best, s);
        for (size_t i = 0; i < scores.nodes.size(); ++i) {
            if (scores.log_scores[i] >= best - 1e-9) scores.argmax.push_back(scores.nodes[i]);
        }
    }
};

void add_estimator_flags(CLI::App* cmd, EstimatorChoice& choice) {
    cmd->add_option("--estimator", choice.name,
                    "exact|centroid|rumor|rsavr|bfsran|degmax|degmin|degran|gnn")
        ->capture_default_str();
    cmd->add_option("--samples", choice.samples, "sample count for sampling estimators")
        ->capture_default_str();
    cmd->add_option("--universe", choice.universe,
                    "tracing-network|observed-contacts|epidemic-network|constant-d")
        ->capture_default_str();
    cmd->add_option("--mode", choice.mode, "exact-boundary|literal-eq3")->capture_default_str();
    cmd->add_option("--constant-degree", choice.constant_degree,
                    "degree for the constant-d universe");
    cmd->add_option("--model", choice.model_path, "model file for the gnn estimator");
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string dot_export(const EpidemicNetwork& net, const SourceScores* scores,
                       const TraceRun* run) {
    std::string out = "graph epidemic {\n";
    for (NodeId v : net.induced.nodes()) {
        out += "  n" + std::to_string(v);
        std::string attrs;
        if (v == net.source()) attrs += "shape=doublecircle,";
        if (scores != nullptr) {
            for (size_t i = 0; i < scores->nodes.size(); ++i) {
                if (scores->nodes[i] == v) {
                    attrs += "label=\"" + std::to_string(v) + "\\n" +
                             format_double(scores->log_scores[i]) + "\",";
                    break;
                }
            }
            if (!scores->argmax.empty() && scores->argmax.front() == v) {
                attrs += "color=red,";
            }
        }
        if (run != nullptr && !run->estimates.empty() && run->estimates.back() == v) {
            attrs += "style=bold,";
        }
        if (!attrs.empty()) {
            attrs.pop_back();
            out += " [" + attrs + "]";
        }
        out += ";\n";
    }
    for (NodeId v : net.induced.nodes()) {
        for (NodeId w : net.induced.neighbors_in(v)) {
            if (v < w) out += "  n" + std::to_string(v) + " -- n" + std::to_string(w) + ";\n";
        }
    }
    out += "}\n";
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::path full = resolve_path(path);
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    std::ofstream out(full);
    if (!out) throw DataError("cannot write " + full.string());
    out << text;
}

std::vector<NodeId> ranking_of(const SourceScores& scores) {
    std::vector<uint32_t> order(scores.nodes.size());
    for (uint32_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (scores.log_scores[a] != scores.log_scores[b]) {
            return scores.log_scores[a] > scores.log_scores[b];
        }
        return scores.nodes[a] < scores.nodes[b];
    });
    std::vector<NodeId> ranking;
    ranking.reserve(order.size());
    for (uint32_t j : order) ranking.push_back(scores.nodes[j]);
    return ranking;
}

// ---- pipeline ----------------------------------------------------------

// Stages reference the outputs of earlier stages by name; the whole wiring
// is validated before anything runs.
struct PipelineContext {
    fs::path out_dir;
    uint64_t seed = 0;
    unsigned jobs = 1;
    std::map<std::string, std::vector<fs::path>> outputs;

    const std::vector<fs::path>& inputs_of(const json& stage, const char* key = "input") {
        std::string name = stage.at("name").get<std::string>();
        if (!stage.contains(key)) {
            throw DataError("stage " + name + " is missing its '" + key + "' reference");
        }
        std::string ref = stage.at(key).get<std::string>();
        auto it = outputs.find(ref);
        if (it == outputs.end()) {
            throw DataError("stage " + name + " references unknown stage '" + ref + "'");
        }
        return it->second;
    }
};

void validate_pipeline(const json& manifest) {
    if (!manifest.contains("stages")) throw DataError("pipeline manifest has no stages");
    std::set<std::string> seen;
    for (const json& stage : manifest.at("stages")) {
        std::string name = stage.at("name").get<std::string>();
        std::string kind = stage.at("kind").get<std::string>();
        if (!seen.insert(name).second) throw DataError("duplicate stage name " + name);
        for (const char* key : {"input", "scores", "truth"}) {
            if (stage.contains(key)) {
                std::string ref = stage.at(key).get<std::string>();
                if (!seen.count(ref)) {
                    throw DataError("stage " + name + " references '" + ref +
                                    "' before it is produced");
                }
            }
        }
        static const std::set<std::string> kinds{"generate", "spread",   "trace", "estimate",
                                                 "train",    "evaluate", "export"};
        if (!kinds.count(kind)) throw DataError("unknown stage kind " + kind);
    }
}

EstimatorChoice estimator_from_stage(const json& stage) {
    EstimatorChoice choice;
    choice.name = stage.value("estimator", std::string("rumor"));
    choice.samples = stage.value("samples", 100u);
    choice.universe = stage.value("universe", std::string("observed-contacts"));
    choice.mode = stage.value("mode", std::string("exact-boundary"));
    choice.constant_degree = stage.value("constant_degree", 0u);
    choice.model_path = stage.value("model", std::string{});
    return choice;
}

void run_pipeline_stage(const json& stage, PipelineContext& ctx) {
    std::string name = stage.at("name").get<std::string>();
    std::string kind = stage.at("kind").get<std::string>();
    uint64_t stage_seed = derive_seed(ctx.seed, name);
    fs::path stage_dir = ctx.out_dir / name;
    std::vector<fs::path>& produced = ctx.outputs[name];

    if (kind == "generate") {
        GeneratorSpec spec = generator_spec_from_json(stage.at("spec"));
        size_t count = stage.value("count", 1u);
        produced.resize(count);
        parallel_for(count, ctx.jobs, [&](size_t i) {
            GeneratorSpec instance = spec;
            instance.seed = derive_seed(stage_seed, i);
            Generated gen = generate(instance);
            fs::path path = stage_dir / (std::to_string(i) + ".graph.json");
            save_graph(path, *gen.graph);
            produced[i] = path;
        });
    } else if (kind == "spread") {
        const auto inputs = ctx.inputs_of(stage);
        SiConfig si = stage.contains("si") ? si_config_from_json(stage.at("si")) : SiConfig{};
        produced.resize(inputs.size());
        parallel_for(inputs.size(), ctx.jobs, [&](size_t i) {
            GraphPtr g = std::make_shared<Graph>(load_graph(inputs[i]));
            SiConfig cfg = si;
            cfg.seed = derive_seed(stage_seed, i);
            NodeId source = random_source(*g, derive_seed(stage_seed, "src", i));
            fs::path path = stage_dir / (std::to_string(i) + ".epidemic.json");
            save_epidemic(path, simulate_si(g, source, cfg));
            produced[i] = path;
        });
    } else if (kind == "trace") {
        const auto inputs = ctx.inputs_of(stage);
        TraceStrategy strategy = strategy_from_name(stage.value("strategy", std::string("bfs")));
        uint32_t every = stage.value("estimate_every", 1u);
        produced.resize(inputs.size());
        parallel_for(inputs.size(), ctx.jobs, [&](size_t i) {
            auto net = std::make_shared<EpidemicNetwork>(load_epidemic(inputs[i]));
            EstimatorChoice choice = estimator_from_stage(stage);
            NodeId index = stage.contains("index")
                               ? stage.at("index").get<NodeId>()
                               : net->infected[Rng(derive_seed(stage_seed, "idx", i))
                                                   .bounded(net->infected.size())];
            TraceRun run = run_trace(net, index, strategy, choice.stage_estimator(),
                                     derive_seed(stage_seed, i), every);
            run.estimator = choice.name;
            fs::path path = stage_dir / (std::to_string(i) + ".trace.json");
            save_trace_run(path, run);
            produced[i] = path;
        });
    } else if (kind == "estimate") {
        const auto inputs = ctx.inputs_of(stage);
        produced.resize(inputs.size());
        parallel_for(inputs.size(), ctx.jobs, [&](size_t i) {
            EpidemicNetwork net = load_epidemic(inputs[i]);
            EstimatorChoice choice = estimator_from_stage(stage);
            SourceScores scores = choice.score_network(net, derive_seed(stage_seed, i));
            fs::path path = stage_dir / (std::to_string(i) + ".scores.json");
            save_scores(path, scores);
            produced[i] = path;
        });
    } else if (kind == "train") {
        DatasetManifest manifest = dataset_manifest_from_json(stage.at("dataset"));
        Dataset dataset = build_dataset(manifest);
        GnnConfig config;
        config.layer_count = stage.value("layers", 3u);
        config.hidden_dim = stage.value("hidden", 32u);
        config.aggregator = aggregator_from_name(stage.value("aggregator", std::string("mean")));
        GnnModel model = GnnModel::init(config, derive_seed(stage_seed, "init"));

        TrainConfig pre;
        pre.phase = TrainPhase::kPretrain;
        pre.epochs = stage.value("epochs", 150u);
        pre.step_size = stage.value("step_size", 1e-3);
        pre.seed = derive_seed(stage_seed, "pretrain");
        TrainResult pre_result = train(model, dataset.pretrain, pre, dataset.validation);

        TrainConfig fine = pre;
        fine.phase = TrainPhase::kFinetune;
        fine.seed = derive_seed(stage_seed, "finetune");
        TrainResult fine_result = train(model, dataset.finetune, fine, dataset.validation);

        fs::path model_path = stage_dir / "model.json";
        save_model(model_path, model);
        EvalReport curve;
        curve.metric = "train-loss";
        curve.breakdown = pre_result.train_loss;
        curve.breakdown.insert(curve.breakdown.end(), fine_result.train_loss.begin(),
                               fine_result.train_loss.end());
        curve.value = curve.breakdown.empty() ? 0.0 : curve.breakdown.back();
        save_report(stage_dir / "loss.json", curve);
        produced = {model_path};
    } else if (kind == "evaluate") {
        std::string metric = stage.value("metric", std::string("topk"));
        EvalReport report;
        report.config_snapshot = stage.dump();
        if (metric == "topk") {
            const auto scores_files = ctx.inputs_of(stage, "scores");
            const auto truth_files = ctx.inputs_of(stage, "truth");
            if (scores_files.size() != truth_files.size()) {
                throw DataError("evaluate: scores and truth stages differ in instance count");
            }
            size_t k = stage.value("k", 1u);
            std::vector<std::vector<NodeId>> rankings;
            std::vector<NodeId> truths;
            for (size_t i = 0; i < scores_files.size(); ++i) {
                rankings.push_back(ranking_of(load_scores(scores_files[i])));
                truths.push_back(load_epidemic(truth_files[i]).source());
            }
            report.metric = "topk-accuracy@" + std::to_string(k);
            for (size_t i = 0; i < rankings.size(); ++i) {
                std::vector<std::vector<NodeId>> one{rankings[i]};
                std::vector<NodeId> t{truths[i]};
                report.breakdown.push_back(topk_accuracy(one, t, k));
            }
            report.value = topk_accuracy(rankings, truths, k);
        } else if (metric == "first-detected" || metric == "average-error") {
            const auto run_files = ctx.inputs_of(stage);
            const auto truth_files = ctx.inputs_of(stage, "truth");
            double total = 0.0;
            for (size_t i = 0; i < run_files.size(); ++i) {
                TraceRun run = load_trace_run(run_files[i]);
                EpidemicNetwork net = load_epidemic(truth_files[i]);
                double value;
                if (metric == "first-detected") {
                    auto fdt = first_detected_time(run.estimates, net.source());
                    value = fdt ? double(*fdt) : double(run.estimates.size());
                } else {
                    value = average_error(run.estimates, net.source(), net);
                }
                report.breakdown.push_back(value);
                total += value;
            }
            report.metric = metric;
            report.value = total / double(run_files.size());
        } else {
            throw DataError("unknown evaluate metric " + metric);
        }
        fs::path path = stage_dir / "report.json";
        save_report(path, report);
        write_text(stage_dir / "report.csv", report.to_csv());
        produced = {path};
    } else if (kind == "export") {
        const auto inputs = ctx.inputs_of(stage);
        std::string format = stage.value("format", std::string("dot"));
        produced.resize(inputs.size());
        parallel_for(inputs.size(), ctx.jobs, [&](size_t i) {
            EpidemicNetwork net = load_epidemic(inputs[i]);
            fs::path path;
            if (format == "dot") {
                path = stage_dir / (std::to_string(i) + ".dot");
                write_text(path, dot_export(net, nullptr, nullptr));
            } else if (format == "json") {
                path = stage_dir / (std::to_string(i) + ".export.json");
                save_epidemic(path, net);
            } else {
                throw DataError("unknown export format " + format);
            }
            produced[i] = path;
        });
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deeptrace: epidemic source inference over contact-tracing networks"};
    app.require_subcommand(1);

    auto* generate_cmd = app.add_subcommand("generate", "emit graphs from a generator spec");
    std::string gen_spec_path, gen_family = "erdos-renyi", gen_out = "graph.json";
    GeneratorSpec gen_spec;
    uint32_t gen_count = 1;
    uint64_t gen_seed = 0;
    generate_cmd->add_option("--spec", gen_spec_path, "GeneratorSpec JSON file");
    generate_cmd->add_option("--family", gen_family, "graph family");
    generate_cmd->add_option("--size", gen_spec.size, "node count");
    generate_cmd->add_option("--edge-probability", gen_spec.edge_probability, "erdos-renyi p");
    generate_cmd->add_option("--attach-count", gen_spec.attach_count, "barabasi-albert m");
    generate_cmd->add_option("--ring-degree", gen_spec.ring_degree, "watts-strogatz k (even)");
    generate_cmd->add_option("--rewire-probability", gen_spec.rewire_probability,
                             "watts-strogatz beta");
    generate_cmd->add_option("--regular-degree", gen_spec.regular_degree,
                             "random-regular-tree degree");
    generate_cmd->add_option("--arity", gen_spec.arity, "complete-nary-tree arity");
    generate_cmd->add_option("--count", gen_count, "number of graphs (indexed outputs)");
    generate_cmd->add_option("--seed", gen_seed, "root seed");
    generate_cmd->add_option("--out", gen_out, "output path (directory with --count > 1)");

    auto* spread_cmd = app.add_subcommand("spread", "simulate SI spreading on a graph");
    std::string spread_graph, spread_out = "epidemic.json", spread_rule = "edge-uniform";
    int64_t spread_source = -1;
    double spread_stop = 0.20;
    uint64_t spread_seed = 0;
    spread_cmd->add_option("--graph", spread_graph, "input graph file")->required();
    spread_cmd->add_option("--source", spread_source, "source node (default: random)");
    spread_cmd->add_option("--stop-fraction", spread_stop, "infected fraction to stop at")
        ->capture_default_str();
    spread_cmd->add_option("--rule", spread_rule, "node-uniform|edge-uniform")
        ->capture_default_str();
    spread_cmd->add_option("--seed", spread_seed, "root seed");
    spread_cmd->add_option("--out", spread_out, "output path");

    auto* trace_cmd = app.add_subcommand("trace", "forward tracing with per-stage estimates");
    std::string trace_net, trace_out = "trace.json", trace_strategy = "bfs";
    int64_t trace_index = -1;
    uint32_t trace_every = 1;
    uint64_t trace_seed = 0;
    EstimatorChoice trace_estimator;
    trace_cmd->add_option("--network", trace_net, "epidemic network file")->required();
    trace_cmd->add_option("--index", trace_index, "index case (default: random infected)");
    trace_cmd->add_option("--strategy", trace_strategy, "bfs|dfs")->capture_default_str();
    trace_cmd->add_option("--estimate-every", trace_every, "estimator budget (stages)");
    trace_cmd->add_option("--seed", trace_seed, "root seed");
    trace_cmd->add_option("--out", trace_out, "output path");
    add_estimator_flags(trace_cmd, trace_estimator);

    auto* estimate_cmd = app.add_subcommand("estimate", "score an epidemic network");
    std::string est_net, est_out = "scores.json";
    uint64_t est_seed = 0;
    EstimatorChoice estimate_choice;
    estimate_choice.name = "exact";
    estimate_cmd->add_option("--network", est_net, "epidemic network file")->required();
    estimate_cmd->add_option("--seed", est_seed, "root seed");
    estimate_cmd->add_option("--out", est_out, "output path");
    add_estimator_flags(estimate_cmd, estimate_choice);

    auto* train_cmd = app.add_subcommand("train", "two-phase training from a dataset manifest");
    std::string train_manifest, train_out = "model.json", train_loss_out, train_agg = "mean";
    uint32_t train_layers = 3, train_hidden = 32, train_epochs = 150;
    double train_step = 1e-3;
    uint64_t train_seed = 0;
    train_cmd->add_option("--manifest", train_manifest, "dataset manifest file")->required();
    train_cmd->add_option("--out", train_out, "model output path");
    train_cmd->add_option("--loss-out", train_loss_out, "loss-curve report path");
    train_cmd->add_option("--aggregator", train_agg, "mean|sum|max|lstm")->capture_default_str();
    train_cmd->add_option("--layers", train_layers, "layer count")->capture_default_str();
    train_cmd->add_option("--hidden", train_hidden, "hidden dimension")->capture_default_str();
    train_cmd->add_option("--epochs", train_epochs, "epochs per phase")->capture_default_str();
    train_cmd->add_option("--step-size", train_step, "optimizer step size")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "root seed");

    auto* eval_cmd = app.add_subcommand("evaluate", "compute metrics over runs or scores");
    std::string eval_metric = "topk", eval_scores, eval_baseline, eval_run, eval_net;
    std::string eval_out = "report.json", eval_csv;
    int64_t eval_truth = -1;
    size_t eval_k = 1;
    eval_cmd->add_option("--metric", eval_metric, "topk|bias|average-error|first-detected")
        ->capture_default_str();
    eval_cmd->add_option("--scores", eval_scores, "scores file");
    eval_cmd->add_option("--baseline", eval_baseline, "reference scores file (bias)");
    eval_cmd->add_option("--run", eval_run, "trace run file (trace metrics)");
    eval_cmd->add_option("--network", eval_net, "epidemic network file");
    eval_cmd->add_option("--truth", eval_truth, "ground-truth node (default: network source)");
    eval_cmd->add_option("--k", eval_k, "k for topk")->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "report path (JSON)");
    eval_cmd->add_option("--csv", eval_csv, "report path (CSV)");

    auto* export_cmd = app.add_subcommand("export", "DOT/JSON graph export with annotations");
    std::string export_net, export_scores, export_run, export_format = "dot";
    std::string export_out = "graph.dot";
    export_cmd->add_option("--network", export_net, "epidemic network file")->required();
    export_cmd->add_option("--scores", export_scores, "scores file (annotations)");
    export_cmd->add_option("--run", export_run, "trace run file (annotations)");
    export_cmd->add_option("--format", export_format, "dot|json")->capture_default_str();
    export_cmd->add_option("--out", export_out, "output path");

    auto* pipeline_cmd = app.add_subcommand("pipeline", "run a staged experiment manifest");
    std::string pipeline_manifest, pipeline_out = "pipeline-out";
    uint64_t pipeline_seed_flag = 0;
    unsigned pipeline_jobs = 1;
    auto* seed_opt =
        pipeline_cmd->add_option("--seed", pipeline_seed_flag, "override the manifest seed");
    pipeline_cmd->add_option("--manifest", pipeline_manifest, "pipeline manifest file")
        ->required();
    pipeline_cmd->add_option("--out", pipeline_out, "output directory");
    pipeline_cmd->add_option("--jobs", pipeline_jobs, "stage-internal parallelism")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (generate_cmd->parsed()) {
            if (!gen_spec_path.empty()) {
                gen_spec =
                    generator_spec_from_json(load_artifact(gen_spec_path, "generator-spec"));
            } else {
                gen_spec.family = family_from_name(gen_family);
            }
            if (gen_count == 1) {
                gen_spec.seed = derive_seed(gen_seed, uint64_t{0});
                Generated gen = generate(gen_spec);
                save_graph(gen_out, *gen.graph);
                if (gen.giant_component_taken) {
                    std::cerr << "note: giant component substituted after 100 attempts\n";
                }
            } else {
                for (uint32_t i = 0; i < gen_count; ++i) {
                    GeneratorSpec instance = gen_spec;
                    instance.seed = derive_seed(gen_seed, i);
                    Generated gen = generate(instance);
                    save_graph(fs::path(gen_out) / (std::to_string(i) + ".graph.json"),
                               *gen.graph);
                }
            }
        } else if (spread_cmd->parsed()) {
            GraphPtr g = std::make_shared<Graph>(load_graph(spread_graph));
            SiConfig cfg;
            cfg.stop_fraction = spread_stop;
            cfg.seed = derive_seed(spread_seed, "si");
            if (spread_rule == "node-uniform") {
                cfg.frontier_rule = FrontierRule::kNodeUniform;
            } else if (spread_rule == "edge-uniform") {
                cfg.frontier_rule = FrontierRule::kEdgeUniform;
            } else {
                throw DataError("unknown frontier rule " + spread_rule);
            }
            NodeId source = spread_source >= 0
                                ? NodeId(spread_source)
                                : random_source(*g, derive_seed(spread_seed, "src"));
            save_epidemic(spread_out, simulate_si(g, source, cfg));
        } else if (trace_cmd->parsed()) {
            auto net = std::make_shared<EpidemicNetwork>(load_epidemic(trace_net));
            NodeId index = trace_index >= 0
                               ? NodeId(trace_index)
                               : net->infected[Rng(derive_seed(trace_seed, "idx"))
                                                   .bounded(net->infected.size())];
            TraceRun run = run_trace(net, index, strategy_from_name(trace_strategy),
                                     trace_estimator.stage_estimator(),
                                     derive_seed(trace_seed, "trace"), trace_every);
            run.estimator = trace_estimator.name;
            save_trace_run(trace_out, run);
        } else if (estimate_cmd->parsed()) {
            EpidemicNetwork net = load_epidemic(est_net);
            SourceScores scores =
                estimate_choice.score_network(net, derive_seed(est_seed, "estimate"));
            save_scores(est_out, scores);
        } else if (train_cmd->parsed()) {
            DatasetManifest manifest = load_dataset_manifest(train_manifest);
            Dataset dataset = build_dataset(manifest);
            for (const std::string& line : dataset.log) std::cerr << "note: " << line << "\n";
            GnnConfig config;
            config.layer_count = train_layers;
            config.hidden_dim = train_hidden;
            config.aggregator = aggregator_from_name(train_agg);
            GnnModel model = GnnModel::init(config, derive_seed(train_seed, "init"));

            TrainConfig pre;
            pre.phase = TrainPhase::kPretrain;
            pre.epochs = train_epochs;
            pre.step_size = train_step;
            pre.seed = derive_seed(train_seed, "pretrain");
            TrainResult pre_result = train(model, dataset.pretrain, pre, dataset.validation);
            TrainConfig fine = pre;
            fine.phase = TrainPhase::kFinetune;
            fine.seed = derive_seed(train_seed, "finetune");
            TrainResult fine_result = train(model, dataset.finetune, fine, dataset.validation);

            save_model(train_out, model);
            if (!train_loss_out.empty()) {
                EvalReport curve;
                curve.metric = "train-loss";
                curve.breakdown = pre_result.train_loss;
                curve.breakdown.insert(curve.breakdown.end(), fine_result.train_loss.begin(),
                                       fine_result.train_loss.end());
                curve.value = curve.breakdown.empty() ? 0.0 : curve.breakdown.back();
                save_report(train_loss_out, curve);
            }
        } else if (eval_cmd->parsed()) {
            EvalReport report;
            if (eval_metric == "topk") {
                if (eval_scores.empty() || eval_net.empty()) {
                    throw DataError("evaluate topk needs --scores and --network");
                }
                SourceScores scores = load_scores(eval_scores);
                EpidemicNetwork net = load_epidemic(eval_net);
                ensure_discriminative(scores.log_scores);
                NodeId truth = eval_truth >= 0 ? NodeId(eval_truth) : net.source();
                std::vector<std::vector<NodeId>> rankings{ranking_of(scores)};
                std::vector<NodeId> truths{truth};
                report.metric = "topk-accuracy@" + std::to_string(eval_k);
                report.value = topk_accuracy(rankings, truths, eval_k);
                report.breakdown = {report.value};
            } else if (eval_metric == "bias") {
                if (eval_scores.empty() || eval_baseline.empty()) {
                    throw DataError("evaluate bias needs --scores and --baseline");
                }
                SourceScores approx = load_scores(eval_scores);
                SourceScores exact = load_scores(eval_baseline);
                if (approx.nodes != exact.nodes) {
                    throw DataError("bias: score tables cover different nodes");
                }
                ensure_discriminative(exact.log_scores);
                double total = 0.0;
                for (size_t i = 0; i < approx.nodes.size(); ++i) {
                    double b = bias_percent(approx.log_scores[i], exact.log_scores[i]);
                    report.breakdown.push_back(b);
                    total += b;
                }
                report.metric = "bias-percent";
                report.value = total / double(approx.nodes.size());
            } else if (eval_metric == "average-error" || eval_metric == "first-detected") {
                if (eval_run.empty() || eval_net.empty()) {
                    throw DataError("evaluate " + eval_metric + " needs --run and --network");
                }
                TraceRun run = load_trace_run(eval_run);
                EpidemicNetwork net = load_epidemic(eval_net);
                NodeId truth = eval_truth >= 0 ? NodeId(eval_truth) : net.source();
                report.metric = eval_metric;
                if (eval_metric == "average-error") {
                    report.value = average_error(run.estimates, truth, net);
                } else {
                    auto fdt = first_detected_time(run.estimates, truth);
                    report.value = fdt ? double(*fdt) : -1.0;
                }
                report.breakdown = {report.value};
            } else {
                throw DataError("unknown metric " + eval_metric);
            }
            save_report(eval_out, report);
            if (!eval_csv.empty()) write_text(eval_csv, report.to_csv());
        } else if (export_cmd->parsed()) {
            EpidemicNetwork net = load_epidemic(export_net);
            SourceScores scores;
            TraceRun run;
            bool has_scores = !export_scores.empty();
            bool has_run = !export_run.empty();
            if (has_scores) scores = load_scores(export_scores);
            if (has_run) run = load_trace_run(export_run);
            if (export_format == "dot") {
                write_text(export_out, dot_export(net, has_scores ? &scores : nullptr,
                                                  has_run ? &run : nullptr));
            } else if (export_format == "json") {
                json j;
                j["network"] = to_json(net);
                if (has_scores) j["scores"] = to_json(scores);
                if (has_run) j["run"] = to_json(run);
                write_text(export_out, j.dump(2) + "\n");
            } else {
                throw DataError("unknown export format " + export_format);
            }
        } else if (pipeline_cmd->parsed()) {
            std::ifstream in(resolve_path(pipeline_manifest));
            if (!in) throw DataError("cannot read " + pipeline_manifest);
            json manifest;
            try {
                in >> manifest;
            } catch (const json::exception& e) {
                throw DataError("pipeline manifest: " + std::string(e.what()));
            }
            validate_pipeline(manifest);
            PipelineContext ctx;
            ctx.out_dir = resolve_path(pipeline_out);
            ctx.seed = seed_opt->count() > 0 ? pipeline_seed_flag
                                             : manifest.value("seed", uint64_t{0});
            ctx.jobs = pipeline_jobs;
            for (const json& stage : manifest.at("stages")) {
                run_pipeline_stage(stage, ctx);
                std::cerr << "stage " << stage.at("name").get<std::string>() << ": "
                          << ctx.outputs[stage.at("name").get<std::string>()].size()
                          << " artifact(s)\n";
            }
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
