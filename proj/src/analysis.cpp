#include "benchcut/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "benchcut/bench_runner.hpp"
#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

void validate_cloud(const PointCloud& cloud, std::size_t min_points) {
  if (cloud.points.size() < min_points)
    throw StatsError("point cloud \"" + cloud.cell_key + "\" needs at least " +
                     std::to_string(min_points) + " points, has " +
                     std::to_string(cloud.points.size()));
  for (const auto& p : cloud.points) {
    if (p.x <= 0) throw StatsError("point cloud has nonpositive x for " + p.id);
    if (p.y < 0) throw StatsError("point cloud has negative y for " + p.id);
  }
}

std::vector<double> axis_values(const PointCloud& cloud, IntervalSource source) {
  std::vector<double> values;
  values.reserve(cloud.points.size());
  for (const auto& p : cloud.points)
    values.push_back(source == IntervalSource::x_values ? p.x : p.y);
  return values;
}

MeanStd stats_of(const std::vector<double>& values) {
  return mean_std(values);
}

Direction compare_to_overall(double subgroup_mean, double overall_mean) {
  if (subgroup_mean < overall_mean) return Direction::below;
  if (subgroup_mean > overall_mean) return Direction::above;
  return Direction::equal;
}

DirectedStats directed(const std::vector<double>& values, double overall_mean) {
  MeanStd s = mean_std(values);
  return {s, compare_to_overall(s.mean, overall_mean)};
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw StatsError("mean_std of empty input");
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw StatsError("pearson: length mismatch (" + std::to_string(xs.size()) +
                     " vs " + std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw StatsError("pearson needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw StatsError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PointCloud cloud_from_runs(const std::vector<RunRecord>& runs,
                           const std::string& cell_key) {
  PointCloud cloud;
  cloud.cell_key = cell_key;
  for (const auto& rec : runs) {
    if (rec.cell_key != cell_key) continue;
    cloud.points.push_back(
        {rec.inference_time_s, static_cast<double>(rec.response_word_len),
         rec.prompt_id});
  }
  return cloud;
}

CentralSlope central_slope(const PointCloud& cloud, CentralLineMode mode) {
  validate_cloud(cloud, 1);
  double m;
  if (mode == CentralLineMode::centroid) {
    double sx = 0.0, sy = 0.0;
    for (const auto& p : cloud.points) {
      sx += p.x;
      sy += p.y;
    }
    if (sx == 0.0) throw StatsError("degenerate centroid: x-bar = 0");
    m = sy / sx;  // line from (0,0) through the centroid
  } else {
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : cloud.points) {
      sxy += p.x * p.y;
      sxx += p.x * p.x;
    }
    if (sxx == 0.0) throw StatsError("degenerate cloud: sum of x^2 = 0");
    m = sxy / sxx;  // least squares through the origin
  }
  return {m, std::atan(m)};
}

double theta_step(const PointCloud& cloud, double lambda, IntervalSource source) {
  if (lambda <= 0) throw UsageError("lambda must be > 0");
  MeanStd s = mean_std(axis_values(cloud, source));
  double degrees = (s.mean + 1.96 * s.stddev) * lambda;
  return degrees * std::numbers::pi / 180.0;
}

ThroughCutResult throughcut(const PointCloud& cloud, const ThroughCutParams& params) {
  validate_cloud(cloud, 3);
  if (params.lambda_max <= 0 || params.lambda_min <= 0)
    throw UsageError("lambda_max and lambda_min must be > 0");

  ThroughCutResult res;
  res.cell_key = cloud.cell_key;
  res.n_points = cloud.points.size();

  CentralSlope central = central_slope(cloud, params.central_line);
  res.m_central = central.m;
  res.theta_central = central.theta;
  res.theta_step_max = theta_step(cloud, params.lambda_max, params.interval_source);
  res.theta_step_min = theta_step(cloud, params.lambda_min, params.interval_source);
  res.theta_max = res.theta_central + res.theta_step_max;
  res.theta_min = res.theta_central - res.theta_step_min;
  if (res.theta_max >= std::numbers::pi / 2)
    throw StatsError("cone crosses the vertical (theta_max >= pi/2) for \"" +
                     cloud.cell_key + "\"");
  if (res.theta_min <= 0)
    throw StatsError("cone crosses the horizontal (theta_min <= 0) for \"" +
                     cloud.cell_key + "\": lambda_min too large");
  res.m_max = std::tan(res.theta_max);
  res.m_min = std::tan(res.theta_min);

  for (const auto& p : cloud.points) {
    if (p.y < res.m_min * p.x)
      res.outlier_ids.push_back(p.id);
    else if (p.y > res.m_max * p.x)
      ++res.n_above_cone;
  }

  std::vector<double> xs, ys;
  xs.reserve(cloud.points.size());
  ys.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  res.r = pearson(xs, ys);
  return res;
}

SummaryRow summarize_cell(const std::vector<RunRecord>& runs,
                          const std::vector<QualityScores>& scores) {
  if (runs.empty()) throw StatsError("summarize_cell over an empty cell");
  SummaryRow row;
  row.cell_key = runs.front().cell_key;
  for (const auto& rec : runs)
    if (rec.cell_key != row.cell_key)
      throw StatsError("summarize_cell: mixed cell keys (" + row.cell_key +
                       " vs " + rec.cell_key + ")");

  std::vector<double> throughputs, latencies, lengths;
  std::optional<double> gpu_peak, gpu_peak_pct;
  for (const auto& rec : runs) {
    if (rec.response_word_len == 0) {
      ++row.n_zero_word;  // excluded from the rate metrics
    } else {
      DerivedMetrics m = derive_metrics(rec);
      throughputs.push_back(m.throughput_wps);
      latencies.push_back(m.latency_spw);
      lengths.push_back(static_cast<double>(rec.response_word_len));
    }
    if (rec.gpu_mem_peak_mb && (!gpu_peak || *rec.gpu_mem_peak_mb > *gpu_peak)) {
      gpu_peak = rec.gpu_mem_peak_mb;
      gpu_peak_pct = rec.gpu_mem_pct;
    }
  }
  row.n = runs.size();
  if (throughputs.empty())
    throw StatsError("summarize_cell: no usable (non-zero-word) runs in " +
                     row.cell_key);
  row.throughput = stats_of(throughputs);
  row.latency = stats_of(latencies);
  row.response_len = stats_of(lengths);
  if (gpu_peak) row.gpu = GpuSummary{*gpu_peak, gpu_peak_pct};

  std::vector<double> rouges, stss, len_ratios;
  std::map<std::string, std::size_t> resp_len_by_id;
  for (const auto& rec : runs) resp_len_by_id[rec.prompt_id] = rec.response_word_len;
  for (const auto& qs : scores) {
    if (qs.cell_key != row.cell_key) continue;
    rouges.push_back(qs.rouge_l);
    stss.push_back(qs.sts);
    if (qs.reference_word_len > 0 && resp_len_by_id.count(qs.prompt_id))
      len_ratios.push_back(static_cast<double>(resp_len_by_id[qs.prompt_id]) /
                           static_cast<double>(qs.reference_word_len));
  }
  if (!rouges.empty()) {
    row.rouge_l = stats_of(rouges);
    row.sts = stats_of(stss);
  }
  if (!len_ratios.empty()) row.cand_ref_len_ratio = stats_of(len_ratios).mean;
  return row;
}

OutlierSummaryRow summarize_outliers(const std::vector<RunRecord>& runs,
                                     const std::vector<QualityScores>& scores,
                                     const ThroughCutResult& tc,
                                     const SummaryRow& overall) {
  if (!runs.empty() && runs.front().cell_key != tc.cell_key)
    throw StatsError("summarize_outliers: runs are for " + runs.front().cell_key +
                     " but ThroughCut result is for " + tc.cell_key);
  if (overall.cell_key != tc.cell_key)
    throw StatsError("summarize_outliers: summary row cell mismatch");

  OutlierSummaryRow row;
  row.cell_key = tc.cell_key;
  row.r = tc.r;
  row.m_max = tc.m_max;
  row.m_central = tc.m_central;
  row.m_min = tc.m_min;
  row.theta_max = tc.theta_max;
  row.theta_central = tc.theta_central;
  row.theta_min = tc.theta_min;
  row.n_outliers = tc.outlier_ids.size();
  if (row.n_outliers == 0) return row;

  std::set<std::string> outliers(tc.outlier_ids.begin(), tc.outlier_ids.end());
  std::vector<double> times, resp_lens, prompt_lens, latencies, throughputs;
  std::vector<double> overall_times, overall_prompt_lens;
  for (const auto& rec : runs) {
    overall_times.push_back(rec.inference_time_s);
    overall_prompt_lens.push_back(static_cast<double>(rec.prompt_word_len));
    if (!outliers.count(rec.prompt_id)) continue;
    times.push_back(rec.inference_time_s);
    resp_lens.push_back(static_cast<double>(rec.response_word_len));
    prompt_lens.push_back(static_cast<double>(rec.prompt_word_len));
    if (rec.response_word_len > 0) {
      DerivedMetrics m = derive_metrics(rec);
      latencies.push_back(m.latency_spw);
      throughputs.push_back(m.throughput_wps);
    }
  }
  if (times.empty())
    throw StatsError("summarize_outliers: outlier ids not found among runs");

  // Overall means for inf-time and prompt length are not part of the
  // summary row, so they come from the runs directly.
  double overall_time_mean = mean_std(overall_times).mean;
  double overall_prompt_mean = mean_std(overall_prompt_lens).mean;

  row.inference_time = directed(times, overall_time_mean);
  row.response_len = directed(resp_lens, overall.response_len.mean);
  row.prompt_len = directed(prompt_lens, overall_prompt_mean);
  if (!latencies.empty()) {
    row.latency = directed(latencies, overall.latency.mean);
    row.throughput = directed(throughputs, overall.throughput.mean);
  }

  std::vector<double> rouges, stss;
  for (const auto& qs : scores) {
    if (qs.cell_key != tc.cell_key || !outliers.count(qs.prompt_id)) continue;
    rouges.push_back(qs.rouge_l);
    stss.push_back(qs.sts);
  }
  if (!rouges.empty() && overall.rouge_l && overall.sts) {
    row.rouge_l = directed(rouges, overall.rouge_l->mean);
    row.sts = directed(stss, overall.sts->mean);
  }
  return row;
}

const char* direction_name(Direction d) {
  switch (d) {
    case Direction::below: return "below";
    case Direction::above: return "above";
    case Direction::equal: return "equal";
  }
  return "equal";
}

}  // namespace benchcut
