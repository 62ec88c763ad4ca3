#include "benchcut/bench_runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <sstream>

#include "benchcut/clock.hpp"
#include "benchcut/errors.hpp"

namespace benchcut {

std::string now_rfc3339_utc() {
  using namespace std::chrono;
  auto now = system_clock::now();
  auto secs = time_point_cast<seconds>(now);
  auto millis = duration_cast<milliseconds>(now - secs).count();
  std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

std::string ExperimentCell::key() const {
  return model_label + "/" + domain.name() + "/" + restriction.key();
}

DerivedMetrics derive_metrics(const RunRecord& rec) {
  if (rec.response_word_len == 0)
    throw StatsError("zero-length response for prompt " + rec.prompt_id +
                     ": throughput/latency undefined");
  if (rec.inference_time_s <= 0)
    throw StatsError("nonpositive inference time for prompt " + rec.prompt_id);
  DerivedMetrics m;
  m.throughput_wps = static_cast<double>(rec.response_word_len) / rec.inference_time_s;
  m.latency_spw = rec.inference_time_s / static_cast<double>(rec.response_word_len);
  return m;
}

double gpu_pct(double peak_mb, double total_mb) {
  if (total_mb <= 0) throw UsageError("gpu total must be > 0");
  if (peak_mb < 0) throw UsageError("gpu peak must be >= 0");
  return 100.0 * peak_mb / total_mb;
}

std::optional<double> run_gpu_probe_once(const std::string& command) {
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return std::nullopt;
  std::string output;
  char buf[256];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
  int status = pclose(pipe);
  if (status != 0) return std::nullopt;
  try {
    std::size_t pos = 0;
    long long mb = std::stoll(output, &pos);
    // Trailing whitespace is fine; anything else is not a clean integer.
    for (; pos < output.size(); ++pos)
      if (!std::isspace(static_cast<unsigned char>(output[pos]))) return std::nullopt;
    if (mb < 0) return std::nullopt;
    return static_cast<double>(mb);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

GpuSampler::GpuSampler(GpuProbe probe) : probe_(std::move(probe)) {
  if (probe_.interval_ms < 10) throw UsageError("gpu probe interval must be >= 10 ms");
}

GpuSampler::~GpuSampler() {
  if (thread_.joinable()) stop();
}

void GpuSampler::start() {
  {
    std::scoped_lock lock(mu_);
    peak_.reset();
    running_ = true;
  }
  thread_ = std::thread([this] { loop(); });
}

void GpuSampler::loop() {
  while (true) {
    // Sample first so even a window shorter than the interval gets one.
    auto sample = run_gpu_probe_once(probe_.probe_command);
    {
      std::unique_lock lock(mu_);
      if (sample && (!peak_ || *sample > *peak_)) peak_ = sample;
      if (!running_) return;
      cv_.wait_for(lock, std::chrono::milliseconds(probe_.interval_ms),
                   [this] { return !running_; });
      if (!running_) return;
    }
  }
}

std::optional<double> GpuSampler::stop() {
  {
    std::scoped_lock lock(mu_);
    running_ = false;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  std::scoped_lock lock(mu_);
  return peak_;
}

std::pair<RawCompletion, double> time_inference(
    const std::function<RawCompletion()>& request) {
  auto start = std::chrono::steady_clock::now();
  RawCompletion completion = request();
  auto elapsed = std::chrono::steady_clock::now() - start;
  double seconds = std::chrono::duration<double>(elapsed).count();
  return {std::move(completion), seconds};
}

RunStats run_grid(const std::vector<ExperimentCell>& cells,
                  const std::map<std::string, Corpus>& corpus_per_domain,
                  const std::optional<GpuProbe>& probe, RunStore& store,
                  const RunOptions& opts) {
  for (const auto& cell : cells)
    if (!corpus_per_domain.count(cell.domain.name()))
      throw UsageError("no corpus loaded for domain \"" + cell.domain.name() + "\"");

  RunStats stats;
  for (const auto& cell : cells) {
    const Corpus& corpus = corpus_per_domain.at(cell.domain.name());
    const std::string cell_key = cell.key();
    EndpointClient client(cell.endpoint);

    bool warmed_up = !opts.warmup;
    int consecutive_failures = 0;
    bool aborted = false;

    for (const auto& prompt : corpus.records) {
      if (aborted) break;
      if (opts.resume && store.contains(cell_key, prompt.id)) {
        ++stats.skipped_resume;
        continue;
      }
      std::string request_text = apply_restriction(prompt.text, cell.restriction);

      if (!warmed_up) {
        try {
          client.complete(request_text);  // untimed; excludes model-load latency
        } catch (const Error& e) {
          std::cerr << "[benchcut] warmup for cell " << cell_key
                    << " failed: " << e.what() << "\n";
        }
        warmed_up = true;
      }

      std::optional<GpuSampler> sampler;
      if (probe) sampler.emplace(*probe);
      std::string started_at = now_rfc3339_utc();
      try {
        if (sampler) sampler->start();
        auto [completion, seconds] =
            time_inference([&] { return client.complete(request_text); });
        std::optional<double> peak = sampler ? sampler->stop() : std::nullopt;

        RunRecord rec;
        rec.cell_key = cell_key;
        rec.prompt_id = prompt.id;
        rec.prompt_word_len = word_count(prompt.text);
        rec.response_text = std::move(completion.text);
        rec.response_word_len = word_count(rec.response_text);
        rec.inference_time_s = seconds;
        rec.started_at = std::move(started_at);
        if (peak) {
          rec.gpu_mem_peak_mb = peak;
          if (probe->gpu_total_mb) rec.gpu_mem_pct = gpu_pct(*peak, *probe->gpu_total_mb);
        } else if (probe) {
          std::cerr << "[benchcut] gpu probe produced no sample for " << cell_key
                    << "/" << prompt.id << "\n";
        }
        store.append(rec);
        ++stats.recorded;
        consecutive_failures = 0;
      } catch (const IoError&) {
        if (sampler) sampler->stop();
        throw;  // store write failure aborts the whole run
      } catch (const Error& e) {
        if (sampler) sampler->stop();
        ++stats.failures;
        ++consecutive_failures;
        std::cerr << "[benchcut] " << cell_key << "/" << prompt.id
                  << " failed: " << e.what() << "\n";
        if (consecutive_failures >= opts.abort_cell_after_consecutive_failures) {
          std::cerr << "[benchcut] aborting cell " << cell_key << " after "
                    << consecutive_failures << " consecutive failures\n";
          ++stats.aborted_cells;
          aborted = true;
        }
      }
    }
  }
  return stats;
}

}  // namespace benchcut
