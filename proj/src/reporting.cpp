#include "benchcut/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// Full precision for persisted numbers; round-trips exactly.
std::string fmt_full(double v) {
  return fmt("%.17g", v);
}

std::string fmt_r(double r) {
  return fmt("%.4f", r);
}

std::string mean_std_cell(const MeanStd& s) {
  return format_metric(s.mean) + " ± " + format_metric(s.stddev);
}

std::string direction_marker(Direction d) {
  switch (d) {
    case Direction::below: return " (↓)";
    case Direction::above: return " (↑)";
    case Direction::equal: return "";
  }
  return "";
}

std::string md_directed(const std::optional<DirectedStats>& ds) {
  if (!ds) return "-";
  return mean_std_cell(ds->stats) + direction_marker(ds->direction);
}

void csv_directed(std::ostringstream& out, const std::optional<DirectedStats>& ds) {
  if (!ds) {
    out << ",-,-,-";
    return;
  }
  out << ',' << format_metric(ds->stats.mean) << ',' << format_metric(ds->stats.stddev)
      << ',' << direction_name(ds->direction);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string row = "|";
  for (const auto& c : cells) row += " " + c + " |";
  row += "\n";
  return row;
}

std::string md_separator(std::size_t n) {
  std::string row = "|";
  for (std::size_t i = 0; i < n; ++i) row += " --- |";
  row += "\n";
  return row;
}

std::string gpu_cell(const std::optional<GpuSummary>& gpu) {
  if (!gpu) return "-";
  std::string cell = fmt("%.0f", gpu->peak_mb);
  if (gpu->pct) cell += " (" + format_metric(*gpu->pct) + "%)";
  return cell;
}

}  // namespace

std::string format_metric(double v) {
  std::string s = fmt("%.2f", v);
  // Trim one trailing zero past the first decimal: "12.00" -> "12.0".
  if (s.size() >= 2 && s.back() == '0' && s[s.size() - 2] != '.')
    s.pop_back();
  return s;
}

std::string render_summary_table(const std::vector<SummaryRow>& rows,
                                 TableFormat format) {
  if (rows.empty()) throw UsageError("render_summary_table: no rows");
  std::ostringstream out;
  if (format == TableFormat::markdown) {
    std::vector<std::string> header = {
        "Cell",          "Throughput (μ ± σ)", "Latency (μ ± σ)",
        "GPU Mem (MB)",  "Response Length (μ ± σ)", "ROUGE-L (μ ± σ)",
        "STS (μ ± σ)",   "Cand/Ref Len", "n", "Zero-word"};
    out << md_row(header) << md_separator(header.size());
    for (const auto& row : rows) {
      out << md_row({
          row.cell_key,
          mean_std_cell(row.throughput),
          mean_std_cell(row.latency),
          gpu_cell(row.gpu),
          mean_std_cell(row.response_len),
          row.rouge_l ? mean_std_cell(*row.rouge_l) : "-",
          row.sts ? mean_std_cell(*row.sts) : "-",
          row.cand_ref_len_ratio ? format_metric(*row.cand_ref_len_ratio) : "-",
          std::to_string(row.n),
          std::to_string(row.n_zero_word),
      });
    }
  } else {
    out << "cell_key,throughput_mean,throughput_std,latency_mean,latency_std,"
           "gpu_mem_peak_mb,gpu_mem_pct,response_len_mean,response_len_std,"
           "rouge_l_mean,rouge_l_std,sts_mean,sts_std,cand_ref_len_ratio,n,"
           "n_zero_word\n";
    for (const auto& row : rows) {
      out << csv_quote(row.cell_key) << ',' << format_metric(row.throughput.mean)
          << ',' << format_metric(row.throughput.stddev) << ','
          << format_metric(row.latency.mean) << ','
          << format_metric(row.latency.stddev) << ','
          << (row.gpu ? fmt("%.0f", row.gpu->peak_mb) : "-") << ','
          << (row.gpu && row.gpu->pct ? format_metric(*row.gpu->pct) : "-") << ','
          << format_metric(row.response_len.mean) << ','
          << format_metric(row.response_len.stddev) << ','
          << (row.rouge_l ? format_metric(row.rouge_l->mean) : "-") << ','
          << (row.rouge_l ? format_metric(row.rouge_l->stddev) : "-") << ','
          << (row.sts ? format_metric(row.sts->mean) : "-") << ','
          << (row.sts ? format_metric(row.sts->stddev) : "-") << ','
          << (row.cand_ref_len_ratio ? format_metric(*row.cand_ref_len_ratio) : "-")
          << ',' << row.n << ',' << row.n_zero_word << '\n';
    }
  }
  return out.str();
}

std::string render_outlier_table(const std::vector<OutlierSummaryRow>& rows,
                                 TableFormat format) {
  if (rows.empty()) throw UsageError("render_outlier_table: no rows");
  std::ostringstream out;
  if (format == TableFormat::markdown) {
    std::vector<std::string> header = {
        "Cell",        "R",           "Max Slope",   "Central Slope",
        "Min Slope",   "Max θ (rad)", "Central θ (rad)", "Min θ (rad)",
        "Outliers",    "Inf Time (s)", "Resp Len",   "Prompt Len",
        "Latency",     "Throughput",  "ROUGE-L",     "STS"};
    out << md_row(header) << md_separator(header.size());
    for (const auto& row : rows) {
      out << md_row({
          row.cell_key,
          fmt_r(row.r),
          format_metric(row.m_max),
          format_metric(row.m_central),
          format_metric(row.m_min),
          format_metric(row.theta_max),
          format_metric(row.theta_central),
          format_metric(row.theta_min),
          std::to_string(row.n_outliers),
          md_directed(row.inference_time),
          md_directed(row.response_len),
          md_directed(row.prompt_len),
          md_directed(row.latency),
          md_directed(row.throughput),
          md_directed(row.rouge_l),
          md_directed(row.sts),
      });
    }
  } else {
    out << "cell_key,r,m_max,m_central,m_min,theta_max,theta_central,theta_min,"
           "n_outliers";
    for (const char* metric :
         {"inf_time", "resp_len", "prompt_len", "latency", "throughput",
          "rouge_l", "sts"})
      out << ',' << metric << "_mean," << metric << "_std," << metric << "_dir";
    out << '\n';
    for (const auto& row : rows) {
      out << csv_quote(row.cell_key) << ',' << fmt_r(row.r) << ','
          << format_metric(row.m_max) << ',' << format_metric(row.m_central) << ','
          << format_metric(row.m_min) << ',' << format_metric(row.theta_max) << ','
          << format_metric(row.theta_central) << ','
          << format_metric(row.theta_min) << ',' << row.n_outliers;
      std::ostringstream tail;
      csv_directed(tail, row.inference_time);
      csv_directed(tail, row.response_len);
      csv_directed(tail, row.prompt_len);
      csv_directed(tail, row.latency);
      csv_directed(tail, row.throughput);
      csv_directed(tail, row.rouge_l);
      csv_directed(tail, row.sts);
      out << tail.str() << '\n';
    }
  }
  return out.str();
}

PlotSpec plot_spec(const PointCloud& cloud, const ThroughCutResult& tc) {
  PlotSpec spec;
  spec.cell_key = cloud.cell_key;
  spec.points = cloud.points;
  spec.m_central = tc.m_central;
  spec.m_max = tc.m_max;
  spec.m_min = tc.m_min;
  spec.outlier_ids = tc.outlier_ids;
  spec.r = tc.r;
  return spec;
}

std::string sanitize_cell_key(const std::string& cell_key) {
  std::string out = cell_key;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-')
      c = '_';
  return out;
}

ScatterFiles emit_scatter(const PlotSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.points.empty()) throw UsageError("emit_scatter: no points");
  std::set<std::string> point_ids;
  for (const auto& p : spec.points) point_ids.insert(p.id);
  for (const auto& id : spec.outlier_ids)
    if (!point_ids.count(id))
      throw UsageError("emit_scatter: outlier id \"" + id + "\" not among points");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::string base = sanitize_cell_key(spec.cell_key);
  ScatterFiles files{out_dir / (base + ".csv"), out_dir / (base + ".svg")};

  std::set<std::string> outliers(spec.outlier_ids.begin(), spec.outlier_ids.end());

  {
    std::ofstream csv(files.csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot write " + files.csv.string());
    csv << "# cell_key=" << spec.cell_key << "\n";
    csv << "# m_central=" << fmt_full(spec.m_central)
        << " m_max=" << fmt_full(spec.m_max) << " m_min=" << fmt_full(spec.m_min)
        << "\n";
    csv << "x,y,id,is_outlier\n";
    for (const auto& p : spec.points)
      csv << fmt_full(p.x) << ',' << fmt_full(p.y) << ',' << csv_quote(p.id) << ','
          << (outliers.count(p.id) ? "true" : "false") << '\n';
  }

  // SVG geometry: fixed canvas, data scaled into the plot area.
  const double width = 640, height = 480;
  const double left = 70, right = 20, top = 50, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  double x_max = 0, y_max = 0;
  for (const auto& p : spec.points) {
    x_max = std::max(x_max, p.x);
    y_max = std::max(y_max, p.y);
  }
  x_max *= 1.05;
  y_max = std::max(y_max * 1.05, 1.0);
  auto sx = [&](double x) { return left + x / x_max * pw; };
  auto sy = [&](double y) { return top + ph - y / y_max * ph; };
  auto px = [&](double v) { return fmt("%.2f", v); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw)
      << "\" height=\"" << px(ph)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << px(left) << "\" y=\"28\" font-family=\"sans-serif\" "
         "font-size=\"14\">R="
      << fmt_r(spec.r) << "; No. of Outlier=" << spec.outlier_ids.size()
      << "</text>\n";
  svg << "<text x=\"" << px(width - right) << "\" y=\"28\" "
         "font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">"
      << spec.cell_key << "</text>\n";

  // Origin-anchored boundary lines, clipped at the plot edge.
  struct Line {
    double m;
    const char* dash;
    const char* color;
  };
  for (const Line& line : {Line{spec.m_max, "6,4", "#888888"},
                           Line{spec.m_central, "", "#333333"},
                           Line{spec.m_min, "6,4", "#888888"}}) {
    if (line.m <= 0) continue;
    double xe = std::min(x_max, y_max / line.m);
    svg << "<line x1=\"" << px(sx(0)) << "\" y1=\"" << px(sy(0)) << "\" x2=\""
        << px(sx(xe)) << "\" y2=\"" << px(sy(line.m * xe)) << "\" stroke=\""
        << line.color << "\" stroke-width=\"1.5\"";
    if (line.dash[0] != '\0') svg << " stroke-dasharray=\"" << line.dash << "\"";
    svg << "/>\n";
  }

  for (const auto& p : spec.points) {
    bool is_outlier = outliers.count(p.id) > 0;
    svg << "<circle cx=\"" << px(sx(p.x)) << "\" cy=\"" << px(sy(p.y))
        << "\" r=\"3.5\" fill=\"" << (is_outlier ? "#c00000" : "#2f5fbf")
        << "\" fill-opacity=\"0.85\"><title>" << p.id << "</title></circle>\n";
  }

  svg << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(height - 15)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
         "Inference time (s)</text>\n";
  svg << "<text x=\"18\" y=\"" << px(top + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << px(top + ph / 2) << ")\">Response word length</text>\n";
  svg << "<text x=\"" << px(left) << "\" y=\"" << px(height - 40)
      << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
  svg << "<text x=\"" << px(left + pw) << "\" y=\"" << px(height - 40)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
      << format_metric(x_max) << "</text>\n";
  svg << "<text x=\"" << px(left - 6) << "\" y=\"" << px(top + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
      << format_metric(y_max) << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(files.svg, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + files.svg.string());
  out << svg.str();
  return files;
}

}  // namespace benchcut
