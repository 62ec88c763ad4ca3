#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace benchcut {

// One inference measurement.
struct RunRecord {
  std::string cell_key;   // "model/domain/restriction"
  std::string prompt_id;
  std::size_t prompt_word_len = 0;
  std::string response_text;
  std::size_t response_word_len = 0;
  double inference_time_s = 0.0;  // > 0, monotonic-clock wall time
  std::optional<double> gpu_mem_peak_mb;
  std::optional<double> gpu_mem_pct;
  std::string started_at;  // RFC 3339 UTC
};

std::string run_record_to_json_line(const RunRecord& rec);
RunRecord run_record_from_json_line(const std::string& line, std::size_t lineno);

// Append-only JSONL store of RunRecords. Opening an existing file indexes
// its (cell_key, prompt_id) pairs so a rerun can resume without duplicates.
class RunStore {
 public:
  explicit RunStore(std::string path);

  const std::string& path() const { return path_; }

  void append(const RunRecord& rec);  // flushes per line
  bool contains(const std::string& cell_key, const std::string& prompt_id) const;
  std::size_t size() const { return keys_.size(); }

  // Reads every record, re-verifying response_word_len against the text.
  static std::vector<RunRecord> load(const std::string& path);

 private:
  std::string path_;
  std::ofstream out_;
  std::set<std::pair<std::string, std::string>> keys_;
};

}  // namespace benchcut
