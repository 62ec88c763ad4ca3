#pragma once

#include <optional>
#include <string>
#include <vector>

#include "benchcut/analysis.hpp"
#include "benchcut/bench_runner.hpp"
#include "benchcut/corpus.hpp"
#include "benchcut/endpoint_client.hpp"
#include "benchcut/reporting.hpp"

namespace benchcut {

struct CorpusSpec {
  std::string domain;
  std::string path;  // .csv is parsed as CSV, anything else as JSONL
};

struct ModelSpec {
  std::string label;  // cell-key component, e.g. "2B"
  EndpointConfig endpoint;
};

// Everything a full run -> score -> analyze -> report pass needs.
// Populated from the JSON config file, then overridden by CLI flags
// (flag > file > default).
struct PipelineConfig {
  std::string config_path;  // recorded in the manifest

  // run
  std::vector<CorpusSpec> corpora;
  std::vector<std::string> blocklist;  // lowercase substrings, config-only
  std::vector<ModelSpec> models;
  std::vector<Restriction> restrictions;
  std::optional<GpuProbe> gpu_probe;
  RunOptions run_options;
  std::string store_path = "runs.jsonl";

  // score
  std::string scores_path = "scores.jsonl";
  std::optional<std::string> references_path;  // JSONL {"id", "reference"}
  std::optional<EndpointConfig> reference_endpoint;
  std::optional<EndpointConfig> embed_endpoint;

  // analyze
  std::optional<double> lambda_max;  // override the per-restriction default
  std::optional<double> lambda_min;
  IntervalSource interval_source = IntervalSource::x_values;
  CentralLineMode central_line = CentralLineMode::centroid;
  std::string analysis_dir = "analysis";

  // report
  std::string report_dir = "report";
  std::string plots_dir = "plots";
  TableFormat report_format = TableFormat::markdown;
};

PipelineConfig load_config_file(const std::string& path);

// Restricted cells default to (0.005, 0.5); unrestricted to (0.0005, 0.05),
// a 10:1 variability ratio between the regimes.
ThroughCutParams default_throughcut_params(const std::string& cell_key);

// Resolved parameters for one cell after config/CLI overrides.
ThroughCutParams throughcut_params_for_cell(const PipelineConfig& cfg,
                                            const std::string& cell_key);

// Records enough to rerun the grid: corpora, endpoints, restrictions,
// lambda settings, store path, created_at, tool version.
void write_manifest(const PipelineConfig& cfg, const std::string& path);

// Each stage persists artifacts the next stage can consume. Returns
// 0 = success, 1 = partial failure (some cells failed), 2 = fatal.
int stage_run(const PipelineConfig& cfg);
int stage_score(const PipelineConfig& cfg);
int stage_analyze(const PipelineConfig& cfg);
int stage_report(const PipelineConfig& cfg);

enum class Stage { run, score, analyze, report };

int run_pipeline(const PipelineConfig& cfg, const std::vector<Stage>& stages);

}  // namespace benchcut
