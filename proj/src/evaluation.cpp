#include "rppg/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "rppg/error.hpp"

namespace rppg {

HrEstimate label_hr(std::span<const double> aligned_labels, double fs, const PostprocessConfig& config) {
  HrEstimate hr = waveform_hr(aligned_labels, fs, config);
  hr.source = HrSource::kLabel;
  return hr;
}

MetricsReport compute_metrics(std::span<const VideoResult> results) {
  if (results.empty()) fail(ErrorCode::kConfigInvalid, "compute_metrics needs at least one result");
  MetricsReport r;
  r.method = results.front().method;
  r.n_videos = results.size();
  const double n = static_cast<double>(results.size());
  double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
  for (const auto& v : results) {
    const double e = v.hr_pred - v.hr_label;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    pct_sum += std::abs(e) / v.hr_label;
  }
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.mape = 100.0 * pct_sum / n;

  r.pearson = std::numeric_limits<double>::quiet_NaN();
  if (results.size() >= 2) {
    double mp = 0.0, ml = 0.0;
    for (const auto& v : results) {
      mp += v.hr_pred;
      ml += v.hr_label;
    }
    mp /= n;
    ml /= n;
    double spl = 0.0, spp = 0.0, sll = 0.0;
    for (const auto& v : results) {
      spl += (v.hr_pred - mp) * (v.hr_label - ml);
      spp += (v.hr_pred - mp) * (v.hr_pred - mp);
      sll += (v.hr_label - ml) * (v.hr_label - ml);
    }
    if (spp > 0.0 && sll > 0.0) {
      r.pearson = std::clamp(spl / std::sqrt(spp * sll), -1.0, 1.0);
      r.pearson_defined = true;
    }
  }
  return r;
}

std::vector<MetricsReport> compute_all_metrics(std::span<const VideoResult> results) {
  std::map<Method, std::vector<VideoResult>> grouped;
  for (const auto& v : results) grouped[v.method].push_back(v);
  std::vector<MetricsReport> out;
  for (auto& [method, rows] : grouped) {
    // Order-normalize so the floating-point sums do not depend on arrival order.
    std::sort(rows.begin(), rows.end(), [](const VideoResult& a, const VideoResult& b) { return a.video_id < b.video_id; });
    out.push_back(compute_metrics(rows));
  }
  return out;
}

namespace {

std::string fixed2(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // Avoid "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

std::string render_report(std::span<const MetricsReport> reports, ReportFormat format) {
  if (reports.empty()) fail(ErrorCode::kConfigInvalid, "nothing to render");
  std::vector<MetricsReport> sorted(reports.begin(), reports.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricsReport& a, const MetricsReport& b) { return a.method < b.method; });
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << kReportCsvHeader << '\n';
    for (const auto& r : sorted) {
      out << to_string(r.method) << ',' << r.n_videos << ',' << fixed2(r.mae) << ',' << fixed2(r.rmse) << ','
          << fixed2(r.mape) << ',' << fixed2(r.pearson) << '\n';
    }
  } else {
    out << "| method | n_videos | MAE | RMSE | MAPE | Pearson |\n";
    out << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : sorted) {
      out << "| " << to_string(r.method) << " | " << r.n_videos << " | " << fixed2(r.mae) << " | " << fixed2(r.rmse)
          << " | " << fixed2(r.mape) << " | " << fixed2(r.pearson) << " |\n";
    }
  }
  return out.str();
}

std::string format_results_csv(std::span<const VideoResult> results) {
  std::ostringstream out;
  out << kResultsCsvHeader << '\n';
  for (const auto& r : results) {
    out << r.video_id << ',' << to_string(r.method) << ',' << shortest(r.hr_pred) << ',' << shortest(r.hr_label)
        << '\n';
  }
  return out.str();
}

std::vector<VideoResult> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<VideoResult> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == kResultsCsvHeader) continue;
    const auto fields = split_csv(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 4) fail(ErrorCode::kParseError, where + ": expected 4 fields");
    VideoResult r;
    r.video_id = fields[0];
    try {
      r.method = parse_method(fields[1]);
    } catch (const Error&) {
      fail(ErrorCode::kParseError, where + ": unknown method '" + fields[1] + "'");
    }
    if (!parse_number(fields[2], r.hr_pred) || !parse_number(fields[3], r.hr_label)) {
      fail(ErrorCode::kParseError, where + ": bad number");
    }
    if (!(r.hr_label > 0.0)) fail(ErrorCode::kParseError, where + ": label HR must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<VideoResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingPath, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results_csv(buf.str());
}

std::string format_exclusions_csv(std::span<const Exclusion> exclusions) {
  std::ostringstream out;
  out << kExclusionCsvHeader << '\n';
  for (const auto& e : exclusions) {
    std::string msg = e.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << e.video_id << ',' << e.stage << ',' << msg << '\n';
  }
  return out.str();
}

}  // namespace rppg
