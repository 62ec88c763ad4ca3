#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "benchcut/errors.hpp"
#include "benchcut/pipeline.hpp"
#include "benchcut/version.hpp"

namespace {

using namespace benchcut;

// Flags shared by several subcommands; applied over the config file only
// when the user actually passed them (flag > file > default).
struct CliFlags {
  std::string config_path;
  std::vector<std::string> prompts;
  std::vector<std::string> domains;
  std::string endpoint_url;
  std::string model_name;
  std::string model_label;
  std::vector<std::string> restrictions;
  std::string out_store;
  std::string gpu_probe_cmd;
  double gpu_total_mb = 0;
  int gpu_interval_ms = 100;
  bool warmup = true;
  bool resume = false;
  std::string runs_path;
  std::string scores_path;
  std::string references_path;
  std::string reference_endpoint_url;
  std::string reference_model;
  std::string embed_endpoint_url;
  std::string embed_model;
  double lambda_max = 0, lambda_min = 0;
  std::string interval_source;
  std::string central_line;
  std::string analysis_dir;
  std::string report_dir;
  std::string plots_dir;
  std::string format;
};

void add_run_flags(CLI::App* cmd, CliFlags& f) {
  cmd->add_option("--prompts", f.prompts,
                  "Prompt corpus file (.jsonl or .csv); repeatable");
  cmd->add_option("--domain", f.domains,
                  "Domain name for the matching --prompts file; repeatable");
  cmd->add_option("--endpoint", f.endpoint_url, "Completion endpoint base URL");
  cmd->add_option("--model", f.model_name, "Model name sent to the endpoint");
  cmd->add_option("--label", f.model_label, "Model label used in cell keys");
  cmd->add_option("--restriction", f.restrictions,
                  "Response restriction: a word count or \"none\"; repeatable");
  cmd->add_option("--out", f.out_store, "Run store output path (JSONL)");
  cmd->add_option("--gpu-probe", f.gpu_probe_cmd,
                  "Command printing GPU MB in use as one integer");
  cmd->add_option("--gpu-total-mb", f.gpu_total_mb, "Total GPU memory in MB");
  cmd->add_option("--gpu-interval-ms", f.gpu_interval_ms,
                  "GPU probe sampling interval");
  cmd->add_flag("--warmup,!--no-warmup", f.warmup,
                "One untimed warmup request per cell");
  cmd->add_flag("--resume", f.resume, "Skip (cell, prompt) pairs already stored");
}

void add_score_flags(CLI::App* cmd, CliFlags& f) {
  if (cmd->get_option_no_throw("--runs") == nullptr)
    cmd->add_option("--runs", f.runs_path, "Run store to score");
  if (cmd->get_option_no_throw("--prompts") == nullptr) {
    cmd->add_option("--prompts", f.prompts,
                    "Prompt corpus, needed when fetching references; repeatable");
    cmd->add_option("--domain", f.domains, "Domain per --prompts file; repeatable");
  }
  cmd->add_option("--references", f.references_path,
                  "JSONL file of {\"id\", \"reference\"} rows");
  cmd->add_option("--reference-endpoint", f.reference_endpoint_url,
                  "Endpoint for fetching missing references");
  cmd->add_option("--reference-model", f.reference_model,
                  "Model name for the reference endpoint");
  cmd->add_option("--embed-endpoint", f.embed_endpoint_url,
                  "Embeddings endpoint base URL (required to score)");
  cmd->add_option("--embed-model", f.embed_model, "Embedding model name");
  cmd->add_option("--scores-out", f.scores_path, "Scores output path (JSONL)");
}

void add_analyze_flags(CLI::App* cmd, CliFlags& f) {
  if (cmd->get_option_no_throw("--runs") == nullptr)
    cmd->add_option("--runs", f.runs_path, "Run store to analyze");
  cmd->add_option("--scores", f.scores_path, "Scores file (optional)");
  cmd->add_option("--lambda-max", f.lambda_max, "Upper-bound lambda override");
  cmd->add_option("--lambda-min", f.lambda_min, "Lower-bound lambda override");
  cmd->add_option("--interval-source", f.interval_source,
                  "Axis supplying the angular step interval: x or y")
      ->check(CLI::IsMember({"x", "y"}));
  cmd->add_option("--central-line", f.central_line,
                  "Central line fit: centroid or least_squares")
      ->check(CLI::IsMember({"centroid", "least_squares"}));
  cmd->add_option("--analysis", f.analysis_dir, "Analysis output directory");
}

void add_report_flags(CLI::App* cmd, CliFlags& f) {
  if (cmd->get_option_no_throw("--analysis") == nullptr)
    cmd->add_option("--analysis", f.analysis_dir, "Analysis directory to render");
  cmd->add_option("--format", f.format, "Table format: md or csv")
      ->check(CLI::IsMember({"md", "csv"}));
  cmd->add_option("--plots", f.plots_dir, "Scatter plot output directory");
  cmd->add_option("--report-dir", f.report_dir, "Rendered table output directory");
}

bool passed(const CLI::App* cmd, const std::string& name) {
  auto* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

PipelineConfig build_config(const CLI::App* cmd, const CliFlags& f) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) cfg = load_config_file(f.config_path);

  if (passed(cmd, "--prompts")) {
    if (!f.domains.empty() && f.domains.size() != f.prompts.size())
      throw UsageError("--domain must be given once per --prompts file");
    cfg.corpora.clear();
    for (std::size_t i = 0; i < f.prompts.size(); ++i) {
      std::string domain = i < f.domains.size() ? f.domains[i] : "common";
      cfg.corpora.push_back({domain, f.prompts[i]});
    }
  }
  if (passed(cmd, "--endpoint")) {
    EndpointConfig endpoint;
    endpoint.base_url = f.endpoint_url;
    endpoint.model_name = f.model_name;
    if (endpoint.model_name.empty())
      throw UsageError("--endpoint requires --model");
    std::string label = f.model_label.empty() ? f.model_name : f.model_label;
    cfg.models.clear();
    cfg.models.push_back({label, endpoint});
  }
  if (passed(cmd, "--restriction")) {
    cfg.restrictions.clear();
    for (const auto& r : f.restrictions)
      cfg.restrictions.push_back(
          r == "none" || r == "unlimited"
              ? Restriction{}
              : Restriction{RestrictionMode::words_approx,
                            "Answer in approximately {n} words.", std::stoi(r)});
  }
  if (cfg.restrictions.empty()) {
    // Default grid: both regimes, as in the 4 x 4 experiment.
    cfg.restrictions.push_back(
        {RestrictionMode::words_approx, "Answer in approximately {n} words.", 50});
    cfg.restrictions.push_back({});
  }
  if (passed(cmd, "--out")) cfg.store_path = f.out_store;
  if (passed(cmd, "--runs")) cfg.store_path = f.runs_path;
  if (passed(cmd, "--gpu-probe")) {
    GpuProbe probe;
    probe.probe_command = f.gpu_probe_cmd;
    probe.interval_ms = f.gpu_interval_ms;
    if (f.gpu_total_mb > 0) probe.gpu_total_mb = f.gpu_total_mb;
    cfg.gpu_probe = probe;
  }
  if (passed(cmd, "--warmup")) cfg.run_options.warmup = f.warmup;
  if (passed(cmd, "--resume")) cfg.run_options.resume = true;

  if (passed(cmd, "--scores-out") || passed(cmd, "--scores"))
    cfg.scores_path = f.scores_path;
  if (passed(cmd, "--references")) cfg.references_path = f.references_path;
  if (passed(cmd, "--reference-endpoint")) {
    EndpointConfig ref;
    ref.base_url = f.reference_endpoint_url;
    ref.model_name =
        f.reference_model.empty() ? "reference" : f.reference_model;
    cfg.reference_endpoint = ref;
  }
  if (passed(cmd, "--embed-endpoint")) {
    EndpointConfig embed;
    embed.base_url = f.embed_endpoint_url;
    embed.model_name = f.embed_model.empty() ? "embedding" : f.embed_model;
    cfg.embed_endpoint = embed;
  }

  if (passed(cmd, "--lambda-max")) cfg.lambda_max = f.lambda_max;
  if (passed(cmd, "--lambda-min")) cfg.lambda_min = f.lambda_min;
  if (passed(cmd, "--interval-source"))
    cfg.interval_source = f.interval_source == "y" ? IntervalSource::y_values
                                                   : IntervalSource::x_values;
  if (passed(cmd, "--central-line"))
    cfg.central_line = f.central_line == "least_squares"
                           ? CentralLineMode::least_squares_origin
                           : CentralLineMode::centroid;
  if (passed(cmd, "--analysis")) cfg.analysis_dir = f.analysis_dir;
  if (passed(cmd, "--report-dir")) cfg.report_dir = f.report_dir;
  if (passed(cmd, "--plots")) cfg.plots_dir = f.plots_dir;
  if (passed(cmd, "--format"))
    cfg.report_format = f.format == "csv" ? TableFormat::csv : TableFormat::markdown;
  return cfg;
}

void require_run_inputs(const PipelineConfig& cfg) {
  if (cfg.corpora.empty())
    throw UsageError("run needs --prompts (or \"corpora\" in the config file)");
  if (cfg.models.empty())
    throw UsageError("run needs --endpoint/--model (or \"models\" in the config file)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark black-box LLM endpoints across domains and detect "
               "throughput outliers"};
  app.set_version_flag("--version", benchcut::kVersion);
  app.require_subcommand(0, 1);

  CliFlags flags;

  CLI::App* run_cmd = app.add_subcommand("run", "Execute the experiment grid");
  CLI::App* score_cmd = app.add_subcommand("score", "Score responses (ROUGE-L, STS)");
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Aggregate and run outlier detection");
  CLI::App* report_cmd = app.add_subcommand("report", "Render tables and plots");
  CLI::App* all_cmd = app.add_subcommand("all", "Run every stage in order");
  for (CLI::App* cmd : {run_cmd, score_cmd, analyze_cmd, report_cmd, all_cmd})
    cmd->add_option("--config", flags.config_path, "JSON config file");

  add_run_flags(run_cmd, flags);
  add_score_flags(score_cmd, flags);
  add_analyze_flags(analyze_cmd, flags);
  add_report_flags(report_cmd, flags);
  add_run_flags(all_cmd, flags);
  add_score_flags(all_cmd, flags);
  add_analyze_flags(all_cmd, flags);
  add_report_flags(all_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    using benchcut::Stage;
    if (run_cmd->parsed()) {
      auto cfg = build_config(run_cmd, flags);
      require_run_inputs(cfg);
      return benchcut::run_pipeline(cfg, {Stage::run});
    }
    if (score_cmd->parsed()) {
      auto cfg = build_config(score_cmd, flags);
      return benchcut::run_pipeline(cfg, {Stage::score});
    }
    if (analyze_cmd->parsed()) {
      auto cfg = build_config(analyze_cmd, flags);
      return benchcut::run_pipeline(cfg, {Stage::analyze});
    }
    if (report_cmd->parsed()) {
      auto cfg = build_config(report_cmd, flags);
      return benchcut::run_pipeline(cfg, {Stage::report});
    }
    if (all_cmd->parsed()) {
      auto cfg = build_config(all_cmd, flags);
      require_run_inputs(cfg);
      return benchcut::run_pipeline(
          cfg, {Stage::run, Stage::score, Stage::analyze, Stage::report});
    }
    std::cerr << app.help() << std::endl;
    return 2;
  } catch (const benchcut::Error& e) {
    std::cerr << "benchcut: " << e.what() << std::endl;
    return 2;
  }
}
