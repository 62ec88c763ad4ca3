#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "benchcut/analysis.hpp"

namespace benchcut {

enum class TableFormat { markdown, csv };

// Rounds to 2 decimals and drops a trailing zero past the first decimal
// place: 12 -> "12.0", 2.88 -> "2.88", 0.09 -> "0.09".
std::string format_metric(double v);

// Per-cell summary table. Markdown cells read "mu ± sigma"; CSV splits mu
// and sigma into separate columns. Throws on empty input.
std::string render_summary_table(const std::vector<SummaryRow>& rows,
                                 TableFormat format);

// Per-cell outlier rows. Direction markers: markdown appends
// "(↓)" / "(↑)", CSV carries a paired direction column. Absent subgroup
// stats render "-".
std::string render_outlier_table(const std::vector<OutlierSummaryRow>& rows,
                                 TableFormat format);

// Per-cell scatter: points, boundary lines (slopes through the
// origin), outliers highlighted, "R=...; No. of Outlier=..." caption.
struct PlotSpec {
  std::string cell_key;
  std::vector<CloudPoint> points;
  double m_central = 0.0, m_max = 0.0, m_min = 0.0;
  std::vector<std::string> outlier_ids;  // each must appear among points
  double r = 0.0;
};

PlotSpec plot_spec(const PointCloud& cloud, const ThroughCutResult& tc);

// Cell key with '/' replaced so it can name a file: "2B/common/50" ->
// "2B_common_50".
std::string sanitize_cell_key(const std::string& cell_key);

struct ScatterFiles {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

// Writes <cell>.csv (x,y,id,is_outlier plus slopes in header comments) and
// a self-contained <cell>.svg. Deterministic byte output.
ScatterFiles emit_scatter(const PlotSpec& spec, const std::filesystem::path& out_dir);

}  // namespace benchcut
