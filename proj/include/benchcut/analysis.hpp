#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benchcut/quality_metrics.hpp"
#include "benchcut/run_store.hpp"

namespace benchcut {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when n = 1
};

// Throws StatsError on empty input.
MeanStd mean_std(std::span<const double> values);

// Pearson's r, clamped to [-1, 1]. Throws StatsError on length mismatch,
// length < 2, or zero variance ("correlation undefined").
double pearson(std::span<const double> xs, std::span<const double> ys);

struct CloudPoint {
  double x = 0.0;  // inference time, seconds
  double y = 0.0;  // response word length
  std::string id;  // prompt_id
};

// Scatter of one cell's measurements in (inference time, response length)
// space. All x > 0, all y >= 0.
struct PointCloud {
  std::vector<CloudPoint> points;
  std::string cell_key;
};

PointCloud cloud_from_runs(const std::vector<RunRecord>& runs,
                           const std::string& cell_key);

// Which axis supplies mu and sigma for the angular step.
enum class IntervalSource { x_values, y_values };

// How the central line's slope is fixed. Both pass through the origin.
enum class CentralLineMode { centroid, least_squares_origin };

struct ThroughCutParams {
  double lambda_max = 0.005;  // angle-adjustment tuning, upper bound
  double lambda_min = 0.5;    // angle-adjustment tuning, lower bound
  IntervalSource interval_source = IntervalSource::x_values;
  CentralLineMode central_line = CentralLineMode::centroid;
};

struct CentralSlope {
  double m = 0.0;      // words per second
  double theta = 0.0;  // radians
};

// Origin-anchored central line: centroid mode gives m = y_bar / x_bar;
// least-squares mode minimizes sum (y - m x)^2 over the cloud.
CentralSlope central_slope(const PointCloud& cloud,
                           CentralLineMode mode = CentralLineMode::centroid);

// Angular step in radians: the scaled 95% upper bound of the chosen axis,
// (mu + 1.96 sigma) * lambda, read as degrees and converted.
double theta_step(const PointCloud& cloud, double lambda, IntervalSource source);

struct ThroughCutResult {
  std::string cell_key;
  double m_central = 0.0, m_max = 0.0, m_min = 0.0;
  double theta_central = 0.0, theta_max = 0.0, theta_min = 0.0;
  double theta_step_max = 0.0, theta_step_min = 0.0;
  double r = 0.0;  // Pearson over the cloud
  std::vector<std::string> outlier_ids;  // points with y < m_min * x
  std::size_t n_points = 0;
  std::size_t n_above_cone = 0;  // y > m_max * x; diagnostic only, never flagged
};

// Slope cone around the central line; outliers fall below the lower
// boundary. Requires >= 3 points; errors if the cone crosses the vertical
// (theta_max >= pi/2) or the horizontal (theta_min <= 0, lambda_min too large).
ThroughCutResult throughcut(const PointCloud& cloud, const ThroughCutParams& params);

struct GpuSummary {
  double peak_mb = 0.0;  // max over the cell's records
  std::optional<double> pct;
};

// One summary-table row.
struct SummaryRow {
  std::string cell_key;
  MeanStd throughput;
  MeanStd latency;
  std::optional<GpuSummary> gpu;
  MeanStd response_len;
  std::optional<MeanStd> rouge_l;
  std::optional<MeanStd> sts;
  std::optional<double> cand_ref_len_ratio;  // mean candidate/reference length
  std::size_t n = 0;
  std::size_t n_zero_word = 0;  // excluded from throughput/latency/response_len
};

// mu +- sigma per metric over usable runs of one cell; zero-word responses
// are excluded from the rate metrics and counted. Throws on an empty cell.
SummaryRow summarize_cell(const std::vector<RunRecord>& runs,
                          const std::vector<QualityScores>& scores);

enum class Direction { below, above, equal };
const char* direction_name(Direction d);

struct DirectedStats {
  MeanStd stats;
  Direction direction = Direction::equal;
};

// One outlier-table row: cone parameters plus outlier-subgroup statistics
// with their position relative to the cell's overall mean.
struct OutlierSummaryRow {
  std::string cell_key;
  double r = 0.0;
  double m_max = 0.0, m_central = 0.0, m_min = 0.0;
  double theta_max = 0.0, theta_central = 0.0, theta_min = 0.0;
  std::size_t n_outliers = 0;
  // All absent when n_outliers = 0.
  std::optional<DirectedStats> inference_time;
  std::optional<DirectedStats> response_len;
  std::optional<DirectedStats> prompt_len;
  std::optional<DirectedStats> latency;
  std::optional<DirectedStats> throughput;
  std::optional<DirectedStats> rouge_l;
  std::optional<DirectedStats> sts;
};

// Subgroup stats over records whose prompt_id is in tc.outlier_ids.
// Direction is a strict comparison with the overall mean. Throws if tc and
// overall were computed for a different cell than the runs.
OutlierSummaryRow summarize_outliers(const std::vector<RunRecord>& runs,
                                     const std::vector<QualityScores>& scores,
                                     const ThroughCutResult& tc,
                                     const SummaryRow& overall);

}  // namespace benchcut
