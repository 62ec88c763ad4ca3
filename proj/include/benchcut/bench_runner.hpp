#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "benchcut/corpus.hpp"
#include "benchcut/endpoint_client.hpp"
#include "benchcut/run_store.hpp"

namespace benchcut {

// One (model, domain, restriction) combination of the experiment grid.
struct ExperimentCell {
  std::string model_label;  // "2B", "7B", ...
  EndpointConfig endpoint;
  Domain domain;
  Restriction restriction;

  std::string key() const;  // "model/domain/restriction"
};

struct DerivedMetrics {
  double throughput_wps = 0.0;  // response words per second
  double latency_spw = 0.0;     // seconds per response word
};

// Per-record reciprocals: throughput = y/t, latency = t/y.
// Throws StatsError for zero-word responses (caller excludes them).
DerivedMetrics derive_metrics(const RunRecord& rec);

// 100 * peak / total. Throws UsageError on nonpositive total.
double gpu_pct(double peak_mb, double total_mb);

// External GPU memory probe: a command whose stdout is one base-10 integer
// (MB in use); nonzero exit means a failed sample.
struct GpuProbe {
  std::string probe_command;
  int interval_ms = 100;  // >= 10
  std::optional<double> gpu_total_mb;
};

// Polls the probe on a background thread between start() and stop().
// At least one sample is taken immediately at start. All samples failing
// degrades to nullopt; benchmarking proceeds without GPU data.
class GpuSampler {
 public:
  explicit GpuSampler(GpuProbe probe);
  ~GpuSampler();

  void start();
  std::optional<double> stop();  // max sampled MB, if any sample succeeded

 private:
  void loop();

  GpuProbe probe_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool running_ = false;
  std::optional<double> peak_;
};

// Runs one sample of the probe command synchronously.
std::optional<double> run_gpu_probe_once(const std::string& command);

// Monotonic wall time spanning exactly the deferred call, sub-ms resolution.
// Endpoint errors propagate; no timing is emitted for a failed request.
std::pair<RawCompletion, double> time_inference(
    const std::function<RawCompletion()>& request);

struct RunOptions {
  bool resume = false;
  bool warmup = true;  // one untimed request per cell before measuring
  int abort_cell_after_consecutive_failures = 5;
};

struct RunStats {
  std::size_t recorded = 0;
  std::size_t skipped_resume = 0;
  std::size_t failures = 0;
  std::size_t aborted_cells = 0;
};

// Executes the grid strictly sequentially: per cell, per prompt in corpus
// order, apply_restriction once, time the request with the GPU window open,
// append a RunRecord. Per-prompt failures are logged to stderr and skipped;
// N consecutive failures abort the cell.
RunStats run_grid(const std::vector<ExperimentCell>& cells,
                  const std::map<std::string, Corpus>& corpus_per_domain,
                  const std::optional<GpuProbe>& probe, RunStore& store,
                  const RunOptions& opts = {});

}  // namespace benchcut
