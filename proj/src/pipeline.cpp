#include "benchcut/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "benchcut/clock.hpp"
#include "benchcut/errors.hpp"
#include "benchcut/version.hpp"

namespace benchcut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

CorpusFormat format_for(const std::string& path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
             ? CorpusFormat::csv
             : CorpusFormat::jsonl;
}

EndpointConfig endpoint_from_json(const json& obj) {
  EndpointConfig cfg;
  cfg.base_url = obj.at("base_url").get<std::string>();
  cfg.model_name = obj.value("model_name", std::string{});
  if (obj.contains("api_key") && obj["api_key"].is_string())
    cfg.api_key = obj["api_key"].get<std::string>();
  cfg.timeout_s = obj.value("timeout_s", cfg.timeout_s);
  cfg.max_retries = obj.value("max_retries", cfg.max_retries);
  cfg.temperature = obj.value("temperature", cfg.temperature);
  if (obj.contains("max_tokens") && obj["max_tokens"].is_number())
    cfg.max_tokens = obj["max_tokens"].get<int>();
  cfg.backoff_base_ms = obj.value("backoff_base_ms", cfg.backoff_base_ms);
  return cfg;
}

Restriction restriction_from_string(const std::string& value,
                                    const std::string& tmpl) {
  Restriction r;
  if (!tmpl.empty()) r.instruction_template = tmpl;
  if (value == "none" || value == "unlimited") {
    r.mode = RestrictionMode::unlimited;
    return r;
  }
  r.mode = RestrictionMode::words_approx;
  try {
    r.n_words = std::stoi(value);
  } catch (const std::exception&) {
    throw UsageError("restriction must be \"none\" or a word count, got \"" +
                     value + "\"");
  }
  if (r.n_words < 1) throw UsageError("restriction word count must be >= 1");
  return r;
}

json mean_std_json(const MeanStd& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

MeanStd mean_std_from_json(const json& obj) {
  return {obj.at("mean").get<double>(), obj.at("stddev").get<double>()};
}

json directed_json(const std::optional<DirectedStats>& ds) {
  if (!ds) return nullptr;
  return {{"mean", ds->stats.mean},
          {"stddev", ds->stats.stddev},
          {"direction", direction_name(ds->direction)}};
}

std::optional<DirectedStats> directed_from_json(const json& obj) {
  if (obj.is_null()) return std::nullopt;
  DirectedStats ds;
  ds.stats = {obj.at("mean").get<double>(), obj.at("stddev").get<double>()};
  std::string dir = obj.at("direction").get<std::string>();
  ds.direction = dir == "below"  ? Direction::below
                 : dir == "above" ? Direction::above
                                  : Direction::equal;
  return ds;
}

json summary_json(const SummaryRow& row) {
  json obj = {
      {"cell_key", row.cell_key},
      {"throughput", mean_std_json(row.throughput)},
      {"latency", mean_std_json(row.latency)},
      {"gpu", nullptr},
      {"response_len", mean_std_json(row.response_len)},
      {"rouge_l", row.rouge_l ? mean_std_json(*row.rouge_l) : json(nullptr)},
      {"sts", row.sts ? mean_std_json(*row.sts) : json(nullptr)},
      {"cand_ref_len_ratio",
       row.cand_ref_len_ratio ? json(*row.cand_ref_len_ratio) : json(nullptr)},
      {"n", row.n},
      {"n_zero_word", row.n_zero_word},
  };
  if (row.gpu) {
    obj["gpu"] = {{"peak_mb", row.gpu->peak_mb},
                  {"pct", row.gpu->pct ? json(*row.gpu->pct) : json(nullptr)}};
  }
  return obj;
}

SummaryRow summary_from_json(const json& obj) {
  SummaryRow row;
  row.cell_key = obj.at("cell_key").get<std::string>();
  row.throughput = mean_std_from_json(obj.at("throughput"));
  row.latency = mean_std_from_json(obj.at("latency"));
  row.response_len = mean_std_from_json(obj.at("response_len"));
  if (!obj.at("gpu").is_null()) {
    GpuSummary gpu;
    gpu.peak_mb = obj["gpu"].at("peak_mb").get<double>();
    if (!obj["gpu"].at("pct").is_null()) gpu.pct = obj["gpu"]["pct"].get<double>();
    row.gpu = gpu;
  }
  if (!obj.at("rouge_l").is_null()) row.rouge_l = mean_std_from_json(obj["rouge_l"]);
  if (!obj.at("sts").is_null()) row.sts = mean_std_from_json(obj["sts"]);
  if (!obj.at("cand_ref_len_ratio").is_null())
    row.cand_ref_len_ratio = obj["cand_ref_len_ratio"].get<double>();
  row.n = obj.at("n").get<std::size_t>();
  row.n_zero_word = obj.at("n_zero_word").get<std::size_t>();
  return row;
}

json throughcut_json(const ThroughCutResult& tc) {
  return {
      {"cell_key", tc.cell_key},
      {"m_central", tc.m_central},
      {"m_max", tc.m_max},
      {"m_min", tc.m_min},
      {"theta_central", tc.theta_central},
      {"theta_max", tc.theta_max},
      {"theta_min", tc.theta_min},
      {"theta_step_max", tc.theta_step_max},
      {"theta_step_min", tc.theta_step_min},
      {"r", tc.r},
      {"outlier_ids", tc.outlier_ids},
      {"n_points", tc.n_points},
      {"n_above_cone", tc.n_above_cone},
  };
}

ThroughCutResult throughcut_from_json(const json& obj) {
  ThroughCutResult tc;
  tc.cell_key = obj.at("cell_key").get<std::string>();
  tc.m_central = obj.at("m_central").get<double>();
  tc.m_max = obj.at("m_max").get<double>();
  tc.m_min = obj.at("m_min").get<double>();
  tc.theta_central = obj.at("theta_central").get<double>();
  tc.theta_max = obj.at("theta_max").get<double>();
  tc.theta_min = obj.at("theta_min").get<double>();
  tc.theta_step_max = obj.at("theta_step_max").get<double>();
  tc.theta_step_min = obj.at("theta_step_min").get<double>();
  tc.r = obj.at("r").get<double>();
  tc.outlier_ids = obj.at("outlier_ids").get<std::vector<std::string>>();
  tc.n_points = obj.at("n_points").get<std::size_t>();
  tc.n_above_cone = obj.at("n_above_cone").get<std::size_t>();
  return tc;
}

json outlier_row_json(const OutlierSummaryRow& row) {
  return {
      {"cell_key", row.cell_key},
      {"r", row.r},
      {"m_max", row.m_max},
      {"m_central", row.m_central},
      {"m_min", row.m_min},
      {"theta_max", row.theta_max},
      {"theta_central", row.theta_central},
      {"theta_min", row.theta_min},
      {"n_outliers", row.n_outliers},
      {"inference_time", directed_json(row.inference_time)},
      {"response_len", directed_json(row.response_len)},
      {"prompt_len", directed_json(row.prompt_len)},
      {"latency", directed_json(row.latency)},
      {"throughput", directed_json(row.throughput)},
      {"rouge_l", directed_json(row.rouge_l)},
      {"sts", directed_json(row.sts)},
  };
}

OutlierSummaryRow outlier_row_from_json(const json& obj) {
  OutlierSummaryRow row;
  row.cell_key = obj.at("cell_key").get<std::string>();
  row.r = obj.at("r").get<double>();
  row.m_max = obj.at("m_max").get<double>();
  row.m_central = obj.at("m_central").get<double>();
  row.m_min = obj.at("m_min").get<double>();
  row.theta_max = obj.at("theta_max").get<double>();
  row.theta_central = obj.at("theta_central").get<double>();
  row.theta_min = obj.at("theta_min").get<double>();
  row.n_outliers = obj.at("n_outliers").get<std::size_t>();
  row.inference_time = directed_from_json(obj.at("inference_time"));
  row.response_len = directed_from_json(obj.at("response_len"));
  row.prompt_len = directed_from_json(obj.at("prompt_len"));
  row.latency = directed_from_json(obj.at("latency"));
  row.throughput = directed_from_json(obj.at("throughput"));
  row.rouge_l = directed_from_json(obj.at("rouge_l"));
  row.sts = directed_from_json(obj.at("sts"));
  return row;
}

struct LoadedCorpora {
  std::map<std::string, Corpus> by_domain;
  std::size_t removed = 0;
};

LoadedCorpora load_corpora(const PipelineConfig& cfg) {
  if (cfg.corpora.empty()) throw UsageError("no prompt corpora configured");
  LoadedCorpora loaded;
  for (const auto& spec : cfg.corpora) {
    Corpus corpus = load_prompts(spec.path, format_for(spec.path));
    if (!cfg.blocklist.empty()) {
      FilterResult filtered = filter_prompts(corpus, cfg.blocklist);
      loaded.removed += filtered.removed;
      corpus = std::move(filtered.corpus);
    }
    std::string domain = Domain::parse(spec.domain).name();
    if (loaded.by_domain.count(domain))
      throw UsageError("domain \"" + domain + "\" configured twice");
    loaded.by_domain.emplace(domain, std::move(corpus));
  }
  return loaded;
}

std::map<std::string, std::string> load_references_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open references file: " + path);
  std::map<std::string, std::string> refs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.contains("id") || !obj.contains("reference")) continue;
    if (obj["reference"].is_string())
      refs[obj["id"].get<std::string>()] = obj["reference"].get<std::string>();
  }
  return refs;
}

std::vector<std::string> sorted_cell_keys(const std::vector<RunRecord>& runs) {
  std::set<std::string> keys;
  for (const auto& rec : runs) keys.insert(rec.cell_key);
  return {keys.begin(), keys.end()};
}

}  // namespace

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  PipelineConfig cfg;
  cfg.config_path = path;
  for (const auto& c : obj.value("corpora", json::array()))
    cfg.corpora.push_back(
        {c.at("domain").get<std::string>(), c.at("path").get<std::string>()});
  for (const auto& b : obj.value("blocklist", json::array()))
    cfg.blocklist.push_back(b.get<std::string>());
  for (const auto& m : obj.value("models", json::array())) {
    ModelSpec spec;
    spec.endpoint = endpoint_from_json(m);
    spec.label = m.value("label", spec.endpoint.model_name);
    cfg.models.push_back(std::move(spec));
  }
  std::string tmpl = obj.value("restriction_template", std::string{});
  for (const auto& r : obj.value("restrictions", json::array())) {
    std::string value = r.is_number() ? std::to_string(r.get<int>())
                                      : r.get<std::string>();
    cfg.restrictions.push_back(restriction_from_string(value, tmpl));
  }
  if (obj.contains("gpu_probe") && obj["gpu_probe"].is_object()) {
    GpuProbe probe;
    probe.probe_command = obj["gpu_probe"].at("command").get<std::string>();
    probe.interval_ms = obj["gpu_probe"].value("interval_ms", probe.interval_ms);
    if (obj["gpu_probe"].contains("gpu_total_mb") &&
        obj["gpu_probe"]["gpu_total_mb"].is_number())
      probe.gpu_total_mb = obj["gpu_probe"]["gpu_total_mb"].get<double>();
    cfg.gpu_probe = probe;
  }
  if (obj.contains("run") && obj["run"].is_object()) {
    const auto& run = obj["run"];
    cfg.run_options.resume = run.value("resume", cfg.run_options.resume);
    cfg.run_options.warmup = run.value("warmup", cfg.run_options.warmup);
    cfg.run_options.abort_cell_after_consecutive_failures =
        run.value("abort_after", cfg.run_options.abort_cell_after_consecutive_failures);
  }
  cfg.store_path = obj.value("store_path", cfg.store_path);
  cfg.scores_path = obj.value("scores_path", cfg.scores_path);
  if (obj.contains("references_path") && obj["references_path"].is_string())
    cfg.references_path = obj["references_path"].get<std::string>();
  if (obj.contains("reference_endpoint") && obj["reference_endpoint"].is_object())
    cfg.reference_endpoint = endpoint_from_json(obj["reference_endpoint"]);
  if (obj.contains("embed_endpoint") && obj["embed_endpoint"].is_object())
    cfg.embed_endpoint = endpoint_from_json(obj["embed_endpoint"]);
  if (obj.contains("lambda_max") && obj["lambda_max"].is_number())
    cfg.lambda_max = obj["lambda_max"].get<double>();
  if (obj.contains("lambda_min") && obj["lambda_min"].is_number())
    cfg.lambda_min = obj["lambda_min"].get<double>();
  std::string source = obj.value("interval_source", std::string("x"));
  cfg.interval_source =
      source == "y" ? IntervalSource::y_values : IntervalSource::x_values;
  std::string central = obj.value("central_line", std::string("centroid"));
  cfg.central_line = central == "least_squares"
                         ? CentralLineMode::least_squares_origin
                         : CentralLineMode::centroid;
  cfg.analysis_dir = obj.value("analysis_dir", cfg.analysis_dir);
  cfg.report_dir = obj.value("report_dir", cfg.report_dir);
  cfg.plots_dir = obj.value("plots_dir", cfg.plots_dir);
  std::string fmt = obj.value("report_format", std::string("md"));
  cfg.report_format = fmt == "csv" ? TableFormat::csv : TableFormat::markdown;
  return cfg;
}

ThroughCutParams default_throughcut_params(const std::string& cell_key) {
  ThroughCutParams params;
  bool unrestricted = cell_key.size() >= 5 &&
                      cell_key.compare(cell_key.size() - 5, 5, "/none") == 0;
  if (unrestricted) {
    params.lambda_max = 0.0005;
    params.lambda_min = 0.05;
  } else {
    params.lambda_max = 0.005;
    params.lambda_min = 0.5;
  }
  return params;
}

ThroughCutParams throughcut_params_for_cell(const PipelineConfig& cfg,
                                            const std::string& cell_key) {
  ThroughCutParams params = default_throughcut_params(cell_key);
  if (cfg.lambda_max) params.lambda_max = *cfg.lambda_max;
  if (cfg.lambda_min) params.lambda_min = *cfg.lambda_min;
  params.interval_source = cfg.interval_source;
  params.central_line = cfg.central_line;
  return params;
}

void write_manifest(const PipelineConfig& cfg, const std::string& path) {
  json corpora = json::array();
  for (const auto& c : cfg.corpora)
    corpora.push_back({{"domain", c.domain}, {"path", c.path}});
  json models = json::array();
  for (const auto& m : cfg.models)
    models.push_back({{"label", m.label},
                      {"base_url", m.endpoint.base_url},
                      {"model_name", m.endpoint.model_name},
                      {"temperature", m.endpoint.temperature}});
  json restrictions = json::array();
  for (const auto& r : cfg.restrictions) restrictions.push_back(r.key());
  json manifest = {
      {"tool_version", kVersion},
      {"created_at", now_rfc3339_utc()},
      {"config_path", cfg.config_path},
      {"corpora", corpora},
      {"models", models},
      {"restrictions", restrictions},
      {"lambda_max", cfg.lambda_max ? json(*cfg.lambda_max) : json(nullptr)},
      {"lambda_min", cfg.lambda_min ? json(*cfg.lambda_min) : json(nullptr)},
      {"interval_source",
       cfg.interval_source == IntervalSource::x_values ? "x" : "y"},
      {"store_path", cfg.store_path},
      {"warmup", cfg.run_options.warmup},
  };
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << manifest.dump(2) << '\n';
}

int stage_run(const PipelineConfig& cfg) {
  if (cfg.models.empty()) throw UsageError("no models configured");
  if (cfg.restrictions.empty()) throw UsageError("no restrictions configured");
  LoadedCorpora corpora = load_corpora(cfg);
  if (corpora.removed > 0)
    std::cerr << "[benchcut] blocklist removed " << corpora.removed << " prompts\n";

  std::vector<ExperimentCell> cells;
  for (const auto& model : cfg.models)
    for (const auto& [domain, corpus] : corpora.by_domain)
      for (const auto& restriction : cfg.restrictions)
        cells.push_back({model.label, model.endpoint, Domain::parse(domain),
                         restriction});

  RunStore store(cfg.store_path);
  write_manifest(cfg, cfg.store_path + ".manifest.json");
  RunStats stats = run_grid(cells, corpora.by_domain, cfg.gpu_probe, store,
                            cfg.run_options);
  std::cerr << "[benchcut] run: " << stats.recorded << " recorded, "
            << stats.skipped_resume << " skipped (resume), " << stats.failures
            << " failed, " << stats.aborted_cells << " cells aborted\n";
  return (stats.failures > 0 || stats.aborted_cells > 0) ? 1 : 0;
}

int stage_score(const PipelineConfig& cfg) {
  std::vector<RunRecord> runs = RunStore::load(cfg.store_path);
  if (runs.empty()) throw UsageError("run store is empty: " + cfg.store_path);
  if (!cfg.embed_endpoint)
    throw UsageError("score stage needs an embedding endpoint");

  // Reference resolution order: corpus reference fields, then the
  // references file, then the reference endpoint for anything still missing.
  std::map<std::string, std::string> references;
  std::map<std::string, std::string> prompt_texts;
  if (!cfg.corpora.empty()) {
    LoadedCorpora corpora = load_corpora(cfg);
    for (const auto& [domain, corpus] : corpora.by_domain)
      for (const auto& rec : corpus.records) {
        prompt_texts[rec.id] = rec.text;
        if (rec.reference) references[rec.id] = *rec.reference;
      }
  }
  if (cfg.references_path) {
    for (auto& [id, ref] : load_references_file(*cfg.references_path))
      references[id] = ref;
  }
  if (cfg.reference_endpoint) {
    EndpointClient ref_client(*cfg.reference_endpoint);
    std::set<std::string> needed;
    for (const auto& run : runs)
      if (!references.count(run.prompt_id)) needed.insert(run.prompt_id);
    std::ofstream fetched_out;
    if (!needed.empty())
      fetched_out.open(cfg.scores_path + ".references.jsonl", std::ios::trunc);
    for (const auto& id : needed) {
      auto it = prompt_texts.find(id);
      if (it == prompt_texts.end()) {
        std::cerr << "[benchcut] no prompt text for " << id
                  << "; cannot fetch a reference\n";
        continue;
      }
      references[id] = ref_client.fetch_reference(it->second);
      if (fetched_out)
        fetched_out << json({{"id", id}, {"reference", references[id]}}).dump()
                    << '\n';
    }
  }

  EndpointClient embed_client(*cfg.embed_endpoint, "BENCHCUT_EMBED_API_KEY");
  Embedder embedder = [&](const std::string& text) {
    return embed_client.embed(text);
  };
  ScoreResult result = score_store(runs, references, embedder);

  std::ofstream out(cfg.scores_path, std::ios::trunc);
  if (!out) throw IoError("cannot write scores: " + cfg.scores_path);
  for (const auto& qs : result.scores)
    out << quality_scores_to_json_line(qs) << '\n';
  std::cerr << "[benchcut] score: " << result.scores.size() << " scored, "
            << result.skipped << " skipped\n";
  return 0;
}

int stage_analyze(const PipelineConfig& cfg) {
  std::vector<RunRecord> runs = RunStore::load(cfg.store_path);
  if (runs.empty()) throw UsageError("run store is empty: " + cfg.store_path);
  std::vector<QualityScores> scores;
  if (fs::exists(cfg.scores_path)) scores = load_scores(cfg.scores_path);

  fs::create_directories(cfg.analysis_dir);
  std::map<std::string, std::vector<RunRecord>> by_cell;
  for (const auto& rec : runs) by_cell[rec.cell_key].push_back(rec);

  int failed_cells = 0;
  for (const auto& [cell_key, cell_runs] : by_cell) {
    fs::path out_path = fs::path(cfg.analysis_dir) /
                        (sanitize_cell_key(cell_key) + ".json");
    try {
      PointCloud cloud = cloud_from_runs(cell_runs, cell_key);
      ThroughCutResult tc =
          throughcut(cloud, throughcut_params_for_cell(cfg, cell_key));
      SummaryRow summary = summarize_cell(cell_runs, scores);
      OutlierSummaryRow outliers = summarize_outliers(cell_runs, scores, tc, summary);

      std::set<std::string> outlier_set(tc.outlier_ids.begin(), tc.outlier_ids.end());
      json points = json::array();
      for (const auto& p : cloud.points)
        points.push_back({{"x", p.x},
                          {"y", p.y},
                          {"id", p.id},
                          {"is_outlier", outlier_set.count(p.id) > 0}});
      json doc = {
          {"cell_key", cell_key},
          {"throughcut", throughcut_json(tc)},
          {"summary", summary_json(summary)},
          {"outlier_summary", outlier_row_json(outliers)},
          {"points", points},
      };
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) throw IoError("cannot write " + out_path.string());
      out << doc.dump(2) << '\n';
    } catch (const StatsError& e) {
      ++failed_cells;
      fs::path err_path = fs::path(cfg.analysis_dir) /
                          (sanitize_cell_key(cell_key) + ".error.json");
      std::ofstream out(err_path, std::ios::trunc);
      out << json({{"cell_key", cell_key}, {"error", e.what()}}).dump(2) << '\n';
      std::cerr << "[benchcut] analyze: cell " << cell_key << " failed: "
                << e.what() << '\n';
    }
  }
  std::cerr << "[benchcut] analyze: " << (by_cell.size() - failed_cells) << "/"
            << by_cell.size() << " cells analyzed\n";
  return failed_cells > 0 ? 1 : 0;
}

int stage_report(const PipelineConfig& cfg) {
  std::vector<fs::path> cell_files;
  if (fs::is_directory(cfg.analysis_dir)) {
    for (const auto& entry : fs::directory_iterator(cfg.analysis_dir)) {
      std::string name = entry.path().filename().string();
      if (name.size() > 5 && name.substr(name.size() - 5) == ".json" &&
          name.find(".error.json") == std::string::npos)
        cell_files.push_back(entry.path());
    }
  }
  if (cell_files.empty())
    throw UsageError("no analysis documents in " + cfg.analysis_dir);
  std::sort(cell_files.begin(), cell_files.end());

  std::vector<SummaryRow> summaries;
  std::vector<OutlierSummaryRow> outlier_rows;
  std::vector<PlotSpec> plots;
  for (const auto& path : cell_files) {
    std::ifstream in(path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    summaries.push_back(summary_from_json(doc.at("summary")));
    outlier_rows.push_back(outlier_row_from_json(doc.at("outlier_summary")));

    ThroughCutResult tc = throughcut_from_json(doc.at("throughcut"));
    PointCloud cloud;
    cloud.cell_key = doc.at("cell_key").get<std::string>();
    for (const auto& p : doc.at("points"))
      cloud.points.push_back({p.at("x").get<double>(), p.at("y").get<double>(),
                              p.at("id").get<std::string>()});
    plots.push_back(plot_spec(cloud, tc));
  }
  auto by_cell_key = [](const auto& a, const auto& b) {
    return a.cell_key < b.cell_key;
  };
  std::sort(summaries.begin(), summaries.end(), by_cell_key);
  std::sort(outlier_rows.begin(), outlier_rows.end(), by_cell_key);

  fs::create_directories(cfg.report_dir);
  const char* ext = cfg.report_format == TableFormat::csv ? ".csv" : ".md";
  auto write_file = [](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
  };
  write_file(fs::path(cfg.report_dir) / (std::string("summary") + ext),
             render_summary_table(summaries, cfg.report_format));
  write_file(fs::path(cfg.report_dir) / (std::string("outliers") + ext),
             render_outlier_table(outlier_rows, cfg.report_format));
  for (const auto& plot : plots) emit_scatter(plot, cfg.plots_dir);
  std::cerr << "[benchcut] report: " << summaries.size() << " cells rendered\n";
  return 0;
}

int run_pipeline(const PipelineConfig& cfg, const std::vector<Stage>& stages) {
  int worst = 0;
  std::vector<std::string> notes;
  for (Stage stage : {Stage::run, Stage::score, Stage::analyze, Stage::report}) {
    if (std::find(stages.begin(), stages.end(), stage) == stages.end()) continue;
    const char* name = stage == Stage::run       ? "run"
                       : stage == Stage::score   ? "score"
                       : stage == Stage::analyze ? "analyze"
                                                 : "report";
    try {
      int code = stage == Stage::run       ? stage_run(cfg)
                 : stage == Stage::score   ? stage_score(cfg)
                 : stage == Stage::analyze ? stage_analyze(cfg)
                                           : stage_report(cfg);
      worst = std::max(worst, code);
      if (code != 0) notes.push_back(std::string(name) + ": partial failure");
    } catch (const Error& e) {
      notes.push_back(std::string(name) + ": fatal: " + e.what());
      worst = 2;
      break;
    }
  }
  if (!notes.empty()) {
    std::cerr << "[benchcut] summary:";
    for (const auto& note : notes) std::cerr << " " << note << ";";
    std::cerr << '\n';
  }
  return worst;
}

}  // namespace benchcut
