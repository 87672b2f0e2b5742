#include "rppg/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rppg/error.hpp"

namespace rppg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kUbfc: return "ubfc";
    case DatasetKind::kPure: return "pure";
    case DatasetKind::kScamps: return "scamps";
    case DatasetKind::kGeneric: return "generic";
    case DatasetKind::kSynthetic: return "synthetic";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (auto k : {DatasetKind::kUbfc, DatasetKind::kPure, DatasetKind::kScamps, DatasetKind::kGeneric,
                 DatasetKind::kSynthetic}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::kInvalidManifest, "unknown dataset_kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Manifest

void validate_manifest(const RecordingManifest& m) {
  if (m.id.empty()) fail(ErrorCode::kInvalidManifest, "empty id");
  if (!(m.fps > 0.0) || !std::isfinite(m.fps)) {
    fail(ErrorCode::kRateMismatch, m.id + ": fps must be positive");
  }
  if (!(m.label_rate > 0.0) || !std::isfinite(m.label_rate)) {
    fail(ErrorCode::kRateMismatch, m.id + ": label_rate must be positive");
  }
  if (m.roi) {
    if (m.roi->w <= 0 || m.roi->h <= 0) fail(ErrorCode::kEmptyRoi, m.id + ": zero-area roi");
    if (m.roi->x < 0 || m.roi->y < 0) fail(ErrorCode::kInvalidManifest, m.id + ": negative roi origin");
  }
}

RecordingManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingPath, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidManifest, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kInvalidManifest, path.string() + ": not an object");

  static const std::array<std::string_view, 7> kKeys = {"id",         "frames_path",  "labels_path", "fps",
                                                        "label_rate", "dataset_kind", "roi"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      fail(ErrorCode::kInvalidManifest, path.string() + ": unexpected key '" + key + "'");
    }
  }

  RecordingManifest m;
  const fs::path base = path.parent_path();
  try {
    m.id = doc.at("id").get<std::string>();
    m.frames_path = doc.at("frames_path").get<std::string>();
    m.labels_path = doc.at("labels_path").get<std::string>();
    m.fps = doc.at("fps").get<double>();
    m.label_rate = doc.at("label_rate").get<double>();
    m.dataset_kind = parse_dataset_kind(doc.at("dataset_kind").get<std::string>());
    if (doc.contains("roi") && !doc["roi"].is_null()) {
      const auto& r = doc["roi"];
      m.roi = Roi{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidManifest, path.string() + ": " + e.what());
  }
  if (m.frames_path.is_relative()) m.frames_path = base / m.frames_path;
  if (m.labels_path.is_relative()) m.labels_path = base / m.labels_path;
  validate_manifest(m);
  return m;
}

void write_manifest(const RecordingManifest& m, const fs::path& path) {
  validate_manifest(m);
  // Paths below the manifest directory are stored relative so a recording
  // directory can be moved as a unit.
  const fs::path base = fs::absolute(path).parent_path().lexically_normal();
  auto rel = [&](const fs::path& p) {
    const fs::path abs = fs::absolute(p).lexically_normal();
    const fs::path r = abs.lexically_relative(base);
    if (r.empty() || *r.begin() == "..") return abs.generic_string();
    return r.generic_string();
  };
  json doc;
  doc["id"] = m.id;
  doc["frames_path"] = rel(m.frames_path);
  doc["labels_path"] = rel(m.labels_path);
  doc["fps"] = m.fps;
  doc["label_rate"] = m.label_rate;
  doc["dataset_kind"] = std::string(to_string(m.dataset_kind));
  if (m.roi) doc["roi"] = {{"x", m.roi->x}, {"y", m.roi->y}, {"w", m.roi->w}, {"h", m.roi->h}};
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kMissingPath, path.string());
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Labels

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<double> read_ubfc_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingPath, path.string());
  std::vector<double> out;
  std::string line;
  if (path.extension() == ".xmp") {
    // time_ms, HR, SpO2, PPG
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto pos = line.rfind(',');
      auto v = parse_double(pos == std::string::npos ? std::string_view(line)
                                                     : std::string_view(line).substr(pos + 1));
      if (!v) fail(ErrorCode::kLabelParseError, path.string() + ":" + std::to_string(line_no));
      out.push_back(*v);
    }
    return out;
  }
  if (!std::getline(in, line)) fail(ErrorCode::kLabelParseError, path.string() + ":1");
  std::istringstream row(line);
  std::string tok;
  while (row >> tok) {
    auto v = parse_double(tok);
    if (!v) fail(ErrorCode::kLabelParseError, path.string() + ":1");
    out.push_back(*v);
  }
  return out;
}

struct PureLabels {
  std::vector<double> waveform;
  std::vector<double> frame_timestamps_ns;
};

PureLabels read_pure_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingPath, path.string());
  PureLabels out;
  try {
    const json doc = json::parse(in);
    for (const auto& entry : doc.at("/FullPackage")) {
      out.waveform.push_back(entry.at("Value").at("waveform").get<double>());
    }
    if (doc.contains("/Image")) {
      for (const auto& entry : doc["/Image"]) out.frame_timestamps_ns.push_back(entry.at("Timestamp").get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kLabelParseError, path.string() + ": " + e.what());
  }
  return out;
}

FrameSequence load_frames(const fs::path& path, double fps) {
  if (!fs::exists(path)) fail(ErrorCode::kMissingPath, path.string());
  if (fs::is_directory(path)) {
    if (fs::exists(path / "frames.bin")) return read_frames_bin(path / "frames.bin", fps);
    return read_png_directory(path, fps);
  }
  return read_frames_bin(path, fps);
}

}  // namespace

std::vector<double> read_label_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingPath, path.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view field = trim(line);
    if (field.empty()) continue;
    if (auto comma = field.find(','); comma != std::string_view::npos) field = field.substr(0, comma);
    auto v = parse_double(field);
    if (!v) {
      if (out.empty() && line_no == 1) continue;  // header
      fail(ErrorCode::kLabelParseError, path.string() + ":" + std::to_string(line_no));
    }
    out.push_back(*v);
  }
  return out;
}

void write_label_csv(std::span<const double> samples, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kMissingPath, path.string());
  out << "ppg\n";
  char buf[32];
  for (double v : samples) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
    out.put('\n');
  }
}

Recording load_recording(const RecordingManifest& manifest) {
  validate_manifest(manifest);
  if (!fs::exists(manifest.labels_path)) fail(ErrorCode::kMissingPath, manifest.labels_path.string());

  Recording rec;
  rec.frames = load_frames(manifest.frames_path, manifest.fps);
  if (rec.frames.n < 2) fail(ErrorCode::kTooShort, manifest.id + ": fewer than 2 frames");
  if (manifest.roi) {
    const Roi& r = *manifest.roi;
    if (static_cast<std::size_t>(r.x + r.w) > rec.frames.width ||
        static_cast<std::size_t>(r.y + r.h) > rec.frames.height) {
      fail(ErrorCode::kInvalidManifest, manifest.id + ": roi exceeds frame bounds");
    }
  }

  rec.labels.rate = manifest.label_rate;
  switch (manifest.dataset_kind) {
    case DatasetKind::kUbfc:
      rec.labels.samples = read_ubfc_labels(manifest.labels_path);
      break;
    case DatasetKind::kPure: {
      auto pure = read_pure_labels(manifest.labels_path);
      rec.labels.samples = std::move(pure.waveform);
      const auto& ts = pure.frame_timestamps_ns;
      if (ts.size() >= 2) {
        const double measured = 1e9 * static_cast<double>(ts.size() - 1) / (ts.back() - ts.front());
        if (std::abs(measured - manifest.fps) > 0.01 * manifest.fps) {
          fail(ErrorCode::kRateMismatch, manifest.id + ": declared fps " + std::to_string(manifest.fps) +
                                             " vs timestamps " + std::to_string(measured));
        }
      }
      break;
    }
    case DatasetKind::kScamps:
    case DatasetKind::kGeneric:
    case DatasetKind::kSynthetic:
      rec.labels.samples = read_label_csv(manifest.labels_path);
      break;
  }
  if (rec.labels.samples.size() < 2) fail(ErrorCode::kLabelParseError, manifest.id + ": fewer than 2 label samples");
  return rec;
}

// ---------------------------------------------------------------------------
// Signal shaping

std::vector<double> align_labels(const LabelSeries& labels, double fps, std::size_t n_frames) {
  const std::size_t m = labels.samples.size();
  if (m < 2 || !(labels.rate > 0.0) || !(fps > 0.0)) {
    fail(ErrorCode::kInsufficientCoverage, "labels need at least 2 samples and positive rates");
  }
  const double label_span = static_cast<double>(m) / labels.rate;
  const double video_span = static_cast<double>(n_frames) / fps;
  if (label_span < 0.95 * video_span) {
    fail(ErrorCode::kInsufficientCoverage,
         "labels span " + std::to_string(label_span) + " s, video " + std::to_string(video_span) + " s");
  }
  std::vector<double> out(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const double pos = static_cast<double>(k) * labels.rate / fps;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= m) {
      out[k] = labels.samples[m - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[k] = frac == 0.0 ? labels.samples[i0]
                         : labels.samples[i0] + frac * (labels.samples[i0 + 1] - labels.samples[i0]);
  }
  return out;
}

RgbTrace spatial_average(const FrameSequence& frames, const std::optional<Roi>& roi) {
  Roi r = roi.value_or(Roi{0, 0, static_cast<int>(frames.width), static_cast<int>(frames.height)});
  if (r.w <= 0 || r.h <= 0) fail(ErrorCode::kEmptyRoi, "zero-area roi");
  if (r.x < 0 || r.y < 0 || static_cast<std::size_t>(r.x + r.w) > frames.width ||
      static_cast<std::size_t>(r.y + r.h) > frames.height) {
    fail(ErrorCode::kInvalidManifest, "roi exceeds frame bounds");
  }

  RgbTrace trace;
  trace.fps = frames.fps;
  trace.r.resize(frames.n);
  trace.g.resize(frames.n);
  trace.b.resize(frames.n);
  const double inv_count = 1.0 / (static_cast<double>(r.w) * static_cast<double>(r.h));
  for (std::size_t k = 0; k < frames.n; ++k) {
    double sum[3] = {0.0, 0.0, 0.0};
    for (int y = r.y; y < r.y + r.h; ++y) {
      const double* row = &frames.data[frames.index(k, static_cast<std::size_t>(y), static_cast<std::size_t>(r.x), 0)];
      for (int x = 0; x < r.w; ++x) {
        sum[0] += row[3 * x];
        sum[1] += row[3 * x + 1];
        sum[2] += row[3 * x + 2];
      }
    }
    trace.r[k] = sum[0] * inv_count;
    trace.g[k] = sum[1] * inv_count;
    trace.b[k] = sum[2] * inv_count;
  }
  return trace;
}

namespace {

double population_std(std::span<const double> x, double mean) {
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

std::vector<double> diff_normalize(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorCode::kTooShort, "diff_normalize needs at least 2 samples");
  std::vector<double> d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double den = x[k + 1] + x[k];
    d[k] = den == 0.0 ? 0.0 : (x[k + 1] - x[k]) / den;
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  const double sd = population_std(d, mean);
  if (!(sd > 0.0) || !std::isfinite(sd)) return std::vector<double>(n, 0.0);
  for (double& v : d) v /= sd;
  return d;
}

std::vector<double> standardize(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double sd = population_std(x, mean);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  // Spread at rounding level of the samples themselves counts as constant.
  if (!(sd > 1e-12 * peak) || !std::isfinite(sd)) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

std::vector<VideoChunk> make_chunks(const FrameSequence& frames, std::size_t chunk_len, const std::string& source_id) {
  if (chunk_len < 2) fail(ErrorCode::kTooShort, "chunk_len must be at least 2");
  const std::size_t count = frames.n / chunk_len;
  const std::size_t pixels = frames.height * frames.width;
  std::vector<VideoChunk> chunks;
  chunks.reserve(count);
  std::vector<double> series(chunk_len);
  for (std::size_t c = 0; c < count; ++c) {
    VideoChunk chunk;
    chunk.length = chunk_len;
    chunk.height = frames.height;
    chunk.width = frames.width;
    chunk.source_id = source_id;
    chunk.chunk_index = c;
    chunk.data.assign(chunk_len * pixels * kChunkChannels, 0.0f);
    const std::size_t first = c * chunk_len;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t t = 0; t < chunk_len; ++t) series[t] = frames.data[(first + t) * pixels * 3 + p * 3 + ch];
        const auto diff = diff_normalize(series);
        const auto raw = standardize(series);
        for (std::size_t t = 0; t < chunk_len; ++t) {
          float* px = &chunk.data[(t * pixels + p) * kChunkChannels];
          px[ch] = static_cast<float>(diff[t]);
          px[3 + ch] = static_cast<float>(raw[t]);
        }
      }
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::vector<std::vector<float>> chunk_labels(std::span<const double> aligned, std::size_t chunk_len) {
  if (chunk_len < 2) fail(ErrorCode::kTooShort, "chunk_len must be at least 2");
  std::vector<std::vector<float>> out;
  for (std::size_t c = 0; c + 1 <= aligned.size() / chunk_len; ++c) {
    std::vector<float> seg(chunk_len);
    for (std::size_t t = 0; t < chunk_len; ++t) seg[t] = static_cast<float>(aligned[c * chunk_len + t]);
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace rppg
