#include "benchcut/run_store.hpp"

#include <json.hpp>

#include "benchcut/corpus.hpp"
#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string run_record_to_json_line(const RunRecord& rec) {
  json obj = {
      {"cell_key", rec.cell_key},
      {"prompt_id", rec.prompt_id},
      {"prompt_word_len", rec.prompt_word_len},
      {"response_text", rec.response_text},
      {"response_word_len", rec.response_word_len},
      {"inference_time_s", rec.inference_time_s},
      {"gpu_mem_peak_mb", optional_to_json(rec.gpu_mem_peak_mb)},
      {"gpu_mem_pct", optional_to_json(rec.gpu_mem_pct)},
      {"started_at", rec.started_at},
  };
  return obj.dump();
}

RunRecord run_record_from_json_line(const std::string& line, std::size_t lineno) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("run store line " + std::to_string(lineno) + ": " + e.what());
  }
  RunRecord rec;
  try {
    rec.cell_key = obj.at("cell_key").get<std::string>();
    rec.prompt_id = obj.at("prompt_id").get<std::string>();
    rec.prompt_word_len = obj.at("prompt_word_len").get<std::size_t>();
    rec.response_text = obj.at("response_text").get<std::string>();
    rec.response_word_len = obj.at("response_word_len").get<std::size_t>();
    rec.inference_time_s = obj.at("inference_time_s").get<double>();
    rec.started_at = obj.at("started_at").get<std::string>();
    if (obj.contains("gpu_mem_peak_mb") && !obj["gpu_mem_peak_mb"].is_null())
      rec.gpu_mem_peak_mb = obj["gpu_mem_peak_mb"].get<double>();
    if (obj.contains("gpu_mem_pct") && !obj["gpu_mem_pct"].is_null())
      rec.gpu_mem_pct = obj["gpu_mem_pct"].get<double>();
  } catch (const json::exception& e) {
    throw ParseError("run store line " + std::to_string(lineno) + ": " + e.what());
  }
  if (rec.inference_time_s <= 0)
    throw ParseError("run store line " + std::to_string(lineno) +
                     ": inference_time_s must be > 0");
  return rec;
}

RunStore::RunStore(std::string path) : path_(std::move(path)) {
  // Index any existing records first so resume can skip them.
  std::ifstream existing(path_);
  if (existing) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(existing, line)) {
      ++lineno;
      if (line.empty()) continue;
      RunRecord rec = run_record_from_json_line(line, lineno);
      keys_.emplace(rec.cell_key, rec.prompt_id);
    }
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw IoError("cannot open run store for append: " + path_);
}

void RunStore::append(const RunRecord& rec) {
  out_ << run_record_to_json_line(rec) << '\n';
  out_.flush();
  if (!out_) throw IoError("write to run store failed: " + path_);
  keys_.emplace(rec.cell_key, rec.prompt_id);
}

bool RunStore::contains(const std::string& cell_key,
                        const std::string& prompt_id) const {
  return keys_.count({cell_key, prompt_id}) > 0;
}

std::vector<RunRecord> RunStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run store: " + path);
  std::vector<RunRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    RunRecord rec = run_record_from_json_line(line, lineno);
    if (rec.response_word_len != word_count(rec.response_text))
      throw ParseError("run store line " + std::to_string(lineno) +
                       ": response_word_len does not match response_text");
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace benchcut
