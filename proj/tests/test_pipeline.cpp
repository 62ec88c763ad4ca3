#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchcut/errors.hpp"
#include "benchcut/mock_server.hpp"
#include "benchcut/pipeline.hpp"
#include "benchcut/run_store.hpp"

using namespace benchcut;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("benchcut_pipe_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("load_config_file maps every key") {
  TempDir dir;
  fs::path cfg_path = dir.path / "config.json";
  write_file(cfg_path, R"({
    "corpora": [{"domain": "common", "path": "prompts.jsonl"},
                {"domain": "finance", "path": "fin.csv"}],
    "blocklist": ["exploit"],
    "models": [{"label": "2B", "base_url": "http://localhost:9001/v1",
                "model_name": "gemma-2b", "timeout_s": 30, "max_retries": 1,
                "temperature": 0.2, "max_tokens": 256, "api_key": "k"}],
    "restrictions": [50, "none"],
    "restriction_template": "Use about {n} words.",
    "gpu_probe": {"command": "echo 1", "interval_ms": 50, "gpu_total_mb": 62438},
    "run": {"resume": true, "warmup": false, "abort_after": 3},
    "store_path": "out/runs.jsonl",
    "scores_path": "out/scores.jsonl",
    "references_path": "refs.jsonl",
    "embed_endpoint": {"base_url": "http://localhost:9002", "model_name": "emb"},
    "lambda_max": 0.01,
    "lambda_min": 0.2,
    "interval_source": "y",
    "central_line": "least_squares",
    "analysis_dir": "out/analysis",
    "report_dir": "out/report",
    "plots_dir": "out/plots",
    "report_format": "csv"
  })");
  PipelineConfig cfg = load_config_file(cfg_path.string());
  CHECK(cfg.config_path == cfg_path.string());
  REQUIRE(cfg.corpora.size() == 2);
  CHECK(cfg.corpora[1].domain == "finance");
  CHECK(cfg.blocklist == std::vector<std::string>{"exploit"});
  REQUIRE(cfg.models.size() == 1);
  CHECK(cfg.models[0].label == "2B");
  CHECK(cfg.models[0].endpoint.base_url == "http://localhost:9001/v1");
  CHECK(cfg.models[0].endpoint.model_name == "gemma-2b");
  CHECK(cfg.models[0].endpoint.timeout_s == 30.0);
  CHECK(cfg.models[0].endpoint.max_retries == 1);
  CHECK(cfg.models[0].endpoint.temperature == 0.2);
  CHECK(cfg.models[0].endpoint.max_tokens == 256);
  CHECK(cfg.models[0].endpoint.api_key == "k");
  REQUIRE(cfg.restrictions.size() == 2);
  CHECK(cfg.restrictions[0].key() == "50");
  CHECK(cfg.restrictions[0].instruction_template == "Use about {n} words.");
  CHECK(cfg.restrictions[1].key() == "none");
  REQUIRE(cfg.gpu_probe.has_value());
  CHECK(cfg.gpu_probe->probe_command == "echo 1");
  CHECK(cfg.gpu_probe->interval_ms == 50);
  CHECK(cfg.gpu_probe->gpu_total_mb == 62438.0);
  CHECK(cfg.run_options.resume);
  CHECK(!cfg.run_options.warmup);
  CHECK(cfg.run_options.abort_cell_after_consecutive_failures == 3);
  CHECK(cfg.store_path == "out/runs.jsonl");
  CHECK(cfg.scores_path == "out/scores.jsonl");
  CHECK(cfg.references_path == "refs.jsonl");
  REQUIRE(cfg.embed_endpoint.has_value());
  CHECK(cfg.embed_endpoint->model_name == "emb");
  CHECK(cfg.lambda_max == 0.01);
  CHECK(cfg.lambda_min == 0.2);
  CHECK(cfg.interval_source == IntervalSource::y_values);
  CHECK(cfg.central_line == CentralLineMode::least_squares_origin);
  CHECK(cfg.analysis_dir == "out/analysis");
  CHECK(cfg.report_format == TableFormat::csv);

  SUBCASE("defaults hold for an empty config") {
    fs::path empty = dir.path / "empty.json";
    write_file(empty, "{}");
    PipelineConfig d = load_config_file(empty.string());
    CHECK(d.store_path == "runs.jsonl");
    CHECK(d.scores_path == "scores.jsonl");
    CHECK(d.analysis_dir == "analysis");
    CHECK(d.report_dir == "report");
    CHECK(d.plots_dir == "plots");
    CHECK(d.report_format == TableFormat::markdown);
    CHECK(d.interval_source == IntervalSource::x_values);
    CHECK(d.central_line == CentralLineMode::centroid);
    CHECK(!d.lambda_max.has_value());
    CHECK(d.run_options.warmup);
    CHECK(!d.run_options.resume);
    CHECK(d.run_options.abort_cell_after_consecutive_failures == 5);
  }
  SUBCASE("bad restriction value") {
    fs::path bad = dir.path / "bad.json";
    write_file(bad, R"({"restrictions": ["soonish"]})");
    CHECK_THROWS_AS(load_config_file(bad.string()), UsageError);
  }
  SUBCASE("malformed json") {
    fs::path bad = dir.path / "mal.json";
    write_file(bad, "{nope");
    CHECK_THROWS_AS(load_config_file(bad.string()), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config_file((dir.path / "nope.json").string()), IoError);
  }
}

TEST_CASE("lambda defaults depend on the restriction regime") {
  ThroughCutParams restricted = default_throughcut_params("2B/common/50");
  CHECK(restricted.lambda_max == 0.005);
  CHECK(restricted.lambda_min == 0.5);
  ThroughCutParams open = default_throughcut_params("2B/common/none");
  CHECK(open.lambda_max == 0.0005);
  CHECK(open.lambda_min == 0.05);
  // Same 10:1 spread in both regimes.
  CHECK(restricted.lambda_min / restricted.lambda_max ==
        open.lambda_min / open.lambda_max);

  PipelineConfig cfg;
  cfg.lambda_min = 0.1;
  cfg.interval_source = IntervalSource::y_values;
  ThroughCutParams merged = throughcut_params_for_cell(cfg, "2B/common/none");
  CHECK(merged.lambda_min == 0.1);        // explicit override wins
  CHECK(merged.lambda_max == 0.0005);     // default for the cell survives
  CHECK(merged.interval_source == IntervalSource::y_values);
}

TEST_CASE("write_manifest records the run setup") {
  TempDir dir;
  PipelineConfig cfg;
  cfg.config_path = "config.json";
  cfg.corpora.push_back({"common", "prompts.jsonl"});
  ModelSpec model;
  model.label = "2B";
  model.endpoint.base_url = "http://localhost:9001";
  model.endpoint.model_name = "gemma-2b";
  cfg.models.push_back(model);
  cfg.restrictions = {Restriction{RestrictionMode::words_approx,
                                  "Answer in approximately {n} words.", 50},
                      Restriction{}};
  fs::path p = dir.path / "manifest.json";
  write_manifest(cfg, p.string());
  json doc = json::parse(slurp(p));
  CHECK(doc.at("tool_version").is_string());
  CHECK(doc.at("created_at").get<std::string>().find("T") != std::string::npos);
  CHECK(doc.at("config_path") == "config.json");
  CHECK(doc.at("corpora").size() == 1);
  CHECK(doc.at("models")[0].at("label") == "2B");
  CHECK(doc.at("restrictions") == json::array({"50", "none"}));
  CHECK(doc.at("store_path") == "runs.jsonl");
  CHECK(doc.at("warmup") == true);
}

TEST_CASE("full pipeline against the mock server") {
  MockModelServer server;
  REQUIRE(server.start() > 0);

  TempDir dir;
  // Prompts lead with q<k> so the mock's delay schedule varies per prompt.
  std::ostringstream prompts;
  for (int i = 1; i <= 3; ++i)
    prompts << R"({"id":"p)" << i << R"(","domain":"common","text":"q)" << i
            << R"( what is item )" << i
            << R"(","reference":"alpha bravo charlie delta echo"})" << "\n";
  write_file(dir.path / "prompts.jsonl", prompts.str());

  PipelineConfig cfg;
  cfg.corpora.push_back({"common", (dir.path / "prompts.jsonl").string()});
  ModelSpec model;
  model.label = "fast";
  model.endpoint.base_url = server.base_url();
  model.endpoint.model_name = "mock-fast";
  model.endpoint.max_retries = 0;
  model.endpoint.timeout_s = 10;
  cfg.models.push_back(model);
  cfg.restrictions = {Restriction{RestrictionMode::words_approx,
                                  "Answer in approximately {n} words.", 50},
                      Restriction{}};
  cfg.run_options.warmup = false;
  cfg.store_path = (dir.path / "runs.jsonl").string();
  cfg.scores_path = (dir.path / "scores.jsonl").string();
  EndpointConfig embed;
  embed.base_url = server.base_url();
  embed.model_name = "mock-embed";
  cfg.embed_endpoint = embed;
  cfg.analysis_dir = (dir.path / "analysis").string();
  cfg.report_dir = (dir.path / "report").string();
  cfg.plots_dir = (dir.path / "plots").string();

  CHECK(stage_run(cfg) == 0);
  CHECK(fs::exists(cfg.store_path));
  CHECK(fs::exists(cfg.store_path + ".manifest.json"));
  auto runs = RunStore::load(cfg.store_path);
  REQUIRE(runs.size() == 6);  // 1 model x 1 domain x 2 restrictions x 3 prompts
  for (const auto& rec : runs) {
    CHECK(rec.inference_time_s > 0.05);
    CHECK(rec.response_word_len > 0);
    // The recorded response is exactly what the mock deterministically
    // produces for this prompt.
    std::string prompt = rec.prompt_id == "p1"   ? "q1 what is item 1"
                         : rec.prompt_id == "p2" ? "q2 what is item 2"
                                                 : "q3 what is item 3";
    if (rec.cell_key == "fast/common/50")
      prompt += "\nAnswer in approximately 50 words.";
    CHECK(rec.response_text == server.response_for(prompt, "mock-fast"));
  }

  SUBCASE("resume leaves the store unchanged") {
    PipelineConfig again = cfg;
    again.run_options.resume = true;
    CHECK(stage_run(again) == 0);
    CHECK(RunStore::load(cfg.store_path).size() == 6);
  }

  CHECK(stage_score(cfg) == 0);
  std::string scores_text = slurp(cfg.scores_path);
  CHECK(std::count(scores_text.begin(), scores_text.end(), '\n') == 6);

  CHECK(stage_analyze(cfg) == 0);
  CHECK(fs::exists(fs::path(cfg.analysis_dir) / "fast_common_50.json"));
  CHECK(fs::exists(fs::path(cfg.analysis_dir) / "fast_common_none.json"));
  json doc = json::parse(slurp(fs::path(cfg.analysis_dir) / "fast_common_50.json"));
  CHECK(doc.at("cell_key") == "fast/common/50");
  CHECK(doc.at("throughcut").at("n_points") == 3);
  CHECK(doc.at("summary").at("n") == 3);
  CHECK(doc.at("points").size() == 3);
  CHECK(!doc.at("summary").at("rouge_l").is_null());

  CHECK(stage_report(cfg) == 0);
  CHECK(fs::exists(fs::path(cfg.report_dir) / "summary.md"));
  CHECK(fs::exists(fs::path(cfg.report_dir) / "outliers.md"));
  CHECK(fs::exists(fs::path(cfg.plots_dir) / "fast_common_50.svg"));
  CHECK(fs::exists(fs::path(cfg.plots_dir) / "fast_common_50.csv"));
  CHECK(fs::exists(fs::path(cfg.plots_dir) / "fast_common_none.svg"));
  std::string summary_md = slurp(fs::path(cfg.report_dir) / "summary.md");
  CHECK(summary_md.find("fast/common/50") != std::string::npos);
  CHECK(summary_md.find("fast/common/none") != std::string::npos);

  SUBCASE("run_pipeline chains the stages with one config") {
    PipelineConfig fresh = cfg;
    fresh.store_path = (dir.path / "runs2.jsonl").string();
    fresh.scores_path = (dir.path / "scores2.jsonl").string();
    fresh.analysis_dir = (dir.path / "analysis2").string();
    fresh.report_dir = (dir.path / "report2").string();
    fresh.plots_dir = (dir.path / "plots2").string();
    int code = run_pipeline(fresh, {Stage::run, Stage::score, Stage::analyze,
                                    Stage::report});
    CHECK(code == 0);
    CHECK(fs::exists(fs::path(fresh.report_dir) / "summary.md"));
  }

  server.stop();
}

TEST_CASE("a zero-variance cell fails analysis partially, not fatally") {
  TempDir dir;
  // Hand-built store: one degenerate cell (constant y) and one healthy cell.
  std::ostringstream store;
  for (int i = 0; i < 3; ++i) {
    RunRecord rec;
    rec.cell_key = "m/common/50";
    rec.prompt_id = "flat" + std::to_string(i);
    rec.prompt_word_len = 3;
    rec.response_text = "alpha bravo charlie";
    rec.response_word_len = 3;
    rec.inference_time_s = 1.0 + 0.1 * i;
    rec.started_at = "2026-01-01T00:00:00.000Z";
    store << run_record_to_json_line(rec) << "\n";
  }
  for (int i = 1; i <= 3; ++i) {
    RunRecord rec;
    rec.cell_key = "m/common/none";
    rec.prompt_id = "ok" + std::to_string(i);
    rec.prompt_word_len = 3;
    rec.response_text = "word";
    for (int j = 1; j < 10 * i; ++j) rec.response_text += " word";
    rec.response_word_len = 10 * static_cast<std::size_t>(i);
    rec.inference_time_s = 1.0 * i;
    rec.started_at = "2026-01-01T00:00:00.000Z";
    store << run_record_to_json_line(rec) << "\n";
  }
  write_file(dir.path / "runs.jsonl", store.str());

  PipelineConfig cfg;
  cfg.store_path = (dir.path / "runs.jsonl").string();
  cfg.scores_path = (dir.path / "scores.jsonl").string();  // absent, fine
  cfg.analysis_dir = (dir.path / "analysis").string();
  cfg.report_dir = (dir.path / "report").string();
  cfg.plots_dir = (dir.path / "plots").string();

  CHECK(stage_analyze(cfg) == 1);
  CHECK(fs::exists(fs::path(cfg.analysis_dir) / "m_common_50.error.json"));
  CHECK(!fs::exists(fs::path(cfg.analysis_dir) / "m_common_50.json"));
  CHECK(fs::exists(fs::path(cfg.analysis_dir) / "m_common_none.json"));
  json err = json::parse(slurp(fs::path(cfg.analysis_dir) / "m_common_50.error.json"));
  CHECK(err.at("cell_key") == "m/common/50");
  CHECK(err.at("error").get<std::string>().find("correlation undefined") !=
        std::string::npos);

  // The healthy cell still reports.
  CHECK(stage_report(cfg) == 0);
  std::string md = slurp(fs::path(cfg.report_dir) / "summary.md");
  CHECK(md.find("m/common/none") != std::string::npos);
  CHECK(md.find("m/common/50") == std::string::npos);
}

TEST_CASE("fatal stage errors surface as exit code 2") {
  TempDir dir;
  PipelineConfig cfg;
  cfg.store_path = (dir.path / "missing.jsonl").string();
  CHECK(run_pipeline(cfg, {Stage::score}) == 2);
  CHECK(run_pipeline(cfg, {Stage::analyze}) == 2);
  cfg.analysis_dir = (dir.path / "no_analysis").string();
  CHECK(run_pipeline(cfg, {Stage::report}) == 2);
  // No models configured.
  CHECK(run_pipeline(cfg, {Stage::run}) == 2);
}

TEST_CASE("stage_score requires an embedding endpoint") {
  TempDir dir;
  RunRecord rec;
  rec.cell_key = "m/common/50";
  rec.prompt_id = "p1";
  rec.response_text = "alpha";
  rec.response_word_len = 1;
  rec.inference_time_s = 1.0;
  rec.started_at = "2026-01-01T00:00:00.000Z";
  write_file(dir.path / "runs.jsonl", run_record_to_json_line(rec) + "\n");
  PipelineConfig cfg;
  cfg.store_path = (dir.path / "runs.jsonl").string();
  CHECK_THROWS_AS(stage_score(cfg), UsageError);
}
