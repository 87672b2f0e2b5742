#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/types.hpp"

namespace rppg {

struct VideoResult {
  std::string video_id;
  Method method = Method::kGreen;
  double hr_pred = 0.0;
  double hr_label = 0.0;
};

struct MetricsReport {
  Method method = Method::kGreen;
  std::size_t n_videos = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double pearson = 0.0;  // NaN when undefined
  bool pearson_defined = false;
};

/// Gold-standard HR through the same chain as predictions (waveform_hr).
HrEstimate label_hr(std::span<const double> aligned_labels, double fs, const PostprocessConfig& config = {});

/// Aggregates one method's videos. Pearson needs n >= 2 and non-constant HRs
/// on both sides; otherwise it is NaN and pearson_defined is false.
MetricsReport compute_metrics(std::span<const VideoResult> results);

/// Groups by method and returns reports in method enum order.
std::vector<MetricsReport> compute_all_metrics(std::span<const VideoResult> results);

enum class ReportFormat { kCsv, kMarkdown };

/// Columns: method, n_videos, MAE, RMSE, MAPE, Pearson; two decimals.
std::string render_report(std::span<const MetricsReport> reports, ReportFormat format);

inline constexpr const char* kReportCsvHeader = "method,n_videos,mae_bpm,rmse_bpm,mape_pct,pearson";
inline constexpr const char* kResultsCsvHeader = "video_id,method,hr_pred_bpm,hr_label_bpm";
inline constexpr const char* kExclusionCsvHeader = "video_id,stage,error";

std::string format_results_csv(std::span<const VideoResult> results);
/// Throws kParseError with the offending line number.
std::vector<VideoResult> parse_results_csv(const std::string& text);
std::vector<VideoResult> read_results_csv(const std::filesystem::path& path);

struct Exclusion {
  std::string video_id;
  std::string stage;
  std::string error;
};

std::string format_exclusions_csv(std::span<const Exclusion> exclusions);

}  // namespace rppg
