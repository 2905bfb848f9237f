#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "deeptrace/epidemic.hpp"
#include "deeptrace/gnn.hpp"
#include "deeptrace/graph.hpp"
#include "deeptrace/likelihood.hpp"
#include "deeptrace/metrics.hpp"
#include "deeptrace/tracing.hpp"

namespace deeptrace {

using json = nlohmann::json;

// Relative paths resolve against $DEEPTRACE_DATA_ROOT when set.
std::filesystem::path resolve_path(const std::filesystem::path& p);

// --- JSON payloads (canonical: keys sorted, shortest-roundtrip doubles) ---

json to_json(const Graph& g);
Graph graph_from_json(const json& j);

json to_json(const SiConfig& cfg);
SiConfig si_config_from_json(const json& j);

json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const json& j);

json to_json(const EpidemicNetwork& net);
EpidemicNetwork epidemic_from_json(const json& j);

json to_json(const TraceRun& run);
TraceRun trace_run_from_json(const json& j);

json to_json(const LikelihoodConfig& cfg);
LikelihoodConfig likelihood_config_from_json(const json& j);

json to_json(const SourceScores& scores);
SourceScores source_scores_from_json(const json& j);

json to_json(const GnnModel& model);
GnnModel gnn_model_from_json(const json& j);

json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const json& j);

// --- versioned container files -----------------------------------------

/// Writes {format, version, checksum, payload}; the checksum covers the
/// canonical payload dump and is verified on load.
void save_artifact(const std::filesystem::path& path, const std::string& kind,
                   const json& payload);

/// Loads and validates a container; throws DataError on a kind/version
/// mismatch, corrupt JSON, or checksum failure.
json load_artifact(const std::filesystem::path& path, const std::string& kind);

void save_graph(const std::filesystem::path& path, const Graph& g);
Graph load_graph(const std::filesystem::path& path);

/// Compact binary alternative for graphs (magic, version, counts, edge list,
/// checksum). JSON stays the interchange default.
void save_graph_binary(const std::filesystem::path& path, const Graph& g);
Graph load_graph_binary(const std::filesystem::path& path);

void save_epidemic(const std::filesystem::path& path, const EpidemicNetwork& net);
EpidemicNetwork load_epidemic(const std::filesystem::path& path);

void save_trace_run(const std::filesystem::path& path, const TraceRun& run);
TraceRun load_trace_run(const std::filesystem::path& path);

void save_scores(const std::filesystem::path& path, const SourceScores& scores);
SourceScores load_scores(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const GnnModel& model);
GnnModel load_model(const std::filesystem::path& path);

void save_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport load_report(const std::filesystem::path& path);

// --- cluster records -----------------------------------------------------

/// Hand-editable contact-cluster file: UTF-8 lines of
///   case <id>
///   edge <id> <id>
///   order <id> <int>      (optional infection-order annotation)
///   source <id>           (optional, at most once)
/// with '#' comments. Case ids are free-form strings without whitespace.
struct ClusterRecord {
    std::vector<std::string> cases;  // declaration order defines NodeIds
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::pair<std::string, int>> order;
    std::optional<std::string> source;

    /// Dense graph plus the symbol table (labels[id] = case string).
    std::pair<Graph, std::vector<std::string>> to_graph() const;
};

ClusterRecord read_cluster(const std::filesystem::path& path);
void write_cluster(const std::filesystem::path& path, const ClusterRecord& record);

// --- dataset generation ----------------------------------------------------

enum class LabelAnnotator { kApproxEq11, kExactEq2, kRegularTreeCentrality };

std::string annotator_name(LabelAnnotator a);
LabelAnnotator annotator_from_name(const std::string& name);

struct SplitSpec {
    uint32_t count = 0;
    uint32_t infected_min = 50;  // target infected-set size range
    uint32_t infected_max = 1000;
    std::vector<GraphFamily> families;
    LabelAnnotator annotator = LabelAnnotator::kApproxEq11;
    uint32_t annotator_samples = 100;  // k for approx-eq11
    uint32_t regular_degree = 3;       // for regular-tree splits
};

struct DatasetManifest {
    SplitSpec pretrain;
    SplitSpec finetune;
    SplitSpec test;
    SplitSpec validation;
    SiConfig si;
    uint64_t seed = 0;
};

json to_json(const DatasetManifest& manifest);
DatasetManifest dataset_manifest_from_json(const json& j);
DatasetManifest load_dataset_manifest(const std::filesystem::path& path);

struct Dataset {
    std::vector<LabeledGraph> pretrain;
    std::vector<LabeledGraph> finetune;
    std::vector<LabeledGraph> test;
    std::vector<LabeledGraph> validation;
    std::vector<std::string> log;  // substitutions and resamples
};

/// Builds every split per the manifest, deterministically from its seeds.
/// Graphs whose exact annotation is infeasible are resampled smaller and the
/// substitution appended to Dataset::log.
Dataset build_dataset(const DatasetManifest& manifest);

/// Labels one epidemic network under the given annotator.
LabeledGraph annotate(std::shared_ptr<const EpidemicNetwork> epidemic, LabelAnnotator annotator,
                      uint32_t samples, uint32_t regular_degree, uint64_t seed);

}  // namespace deeptrace
