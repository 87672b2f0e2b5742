#include "rppg/pipeline.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "binary_io.hpp"
#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"
#include "rppg/methods.hpp"

namespace rppg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ChunkMode mode) { return mode == ChunkMode::kVideo ? "video" : "chunk"; }

ChunkMode parse_chunk_mode(std::string_view name) {
  if (name == "video") return ChunkMode::kVideo;
  if (name == "chunk") return ChunkMode::kChunk;
  fail(ErrorCode::kConfigInvalid, "chunk_mode must be 'video' or 'chunk'");
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string sha256_hex(const fs::path& file) {
  const auto bytes = detail::read_file(file.string());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kDegenerateInput, "sha256 failed for " + file.string());
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::vector<fs::path> expand_manifests(const std::vector<std::string>& patterns) {
  std::set<fs::path> found;
  for (const auto& pattern : patterns) {
    if (pattern.find_first_of("*?[") == std::string::npos) {
      if (!fs::exists(pattern)) fail(ErrorCode::kMissingPath, pattern);
      found.insert(fs::path(pattern).lexically_normal());
      continue;
    }
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) found.insert(fs::path(g.gl_pathv[i]).lexically_normal());
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) fail(ErrorCode::kMissingPath, "glob failed: " + pattern);
  }
  return {found.begin(), found.end()};
}

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

void require_usable(const RunConfig& c) {
  if (c.manifests.empty()) fail(ErrorCode::kUsage, "no manifests given");
  if (c.methods.empty()) fail(ErrorCode::kUsage, "no methods given");
  if (c.chunk_len < 2) fail(ErrorCode::kConfigInvalid, "chunk_len must be >= 2");
  if (c.post.pad_factor < 1) fail(ErrorCode::kConfigInvalid, "hr.pad_factor must be >= 1");
  if (c.post.filter_order < 1) fail(ErrorCode::kConfigInvalid, "filter.order must be >= 1");
  if (!(c.post.low_hz > 0.0 && c.post.low_hz < c.post.high_hz)) {
    fail(ErrorCode::kConfigInvalid, "filter band must satisfy 0 < low_hz < high_hz");
  }
  if (c.pbv_signature) (void)PbvSignature(*c.pbv_signature);
}

void write_text(const fs::path& path, const std::string& text) {
  detail::write_file(path.string(), std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

MethodOptions method_options(const RunConfig& c) {
  MethodOptions o;
  if (c.pbv_signature) o.pbv_signature = PbvSignature(*c.pbv_signature);
  o.chrom_band = {c.post.filter_order, c.post.low_hz, c.post.high_hz, 0.0};
  o.ica_band = {c.post.low_hz, c.post.high_hz};
  return o;
}

RgbTrace slice(const RgbTrace& t, std::size_t first, std::size_t len) {
  RgbTrace out;
  out.fps = t.fps;
  const auto b = static_cast<std::ptrdiff_t>(first);
  const auto e = static_cast<std::ptrdiff_t>(first + len);
  out.r.assign(t.r.begin() + b, t.r.begin() + e);
  out.g.assign(t.g.begin() + b, t.g.begin() + e);
  out.b.assign(t.b.begin() + b, t.b.begin() + e);
  return out;
}

std::string error_text(const std::exception& e) { return e.what(); }

}  // namespace

std::string resolved_config_text(const RunConfig& c) {
  std::ostringstream out;
  out << "manifests = [";
  for (std::size_t i = 0; i < c.manifests.size(); ++i) out << (i ? ", " : "") << quoted(c.manifests[i]);
  out << "]\nmethods = [";
  for (std::size_t i = 0; i < c.methods.size(); ++i) out << (i ? ", " : "") << quoted(std::string(to_string(c.methods[i])));
  out << "]\n";
  out << "chunk_mode = " << quoted(std::string(to_string(c.chunk_mode))) << '\n';
  out << "chunk_len = " << c.chunk_len << '\n';
  out << "output = " << quoted(c.output_dir.generic_string()) << '\n';
  out << "jobs = " << c.jobs << '\n';
  out << "seed = " << c.seed << '\n';
  out << "filter.order = " << c.post.filter_order << '\n';
  out << "filter.low_hz = " << shortest(c.post.low_hz) << '\n';
  out << "filter.high_hz = " << shortest(c.post.high_hz) << '\n';
  out << "detrend.enabled = " << (c.post.detrend_enabled ? "true" : "false") << '\n';
  out << "detrend.lambda = " << shortest(c.post.detrend_lambda) << '\n';
  out << "hr.pad_factor = " << c.post.pad_factor << '\n';
  if (c.pbv_signature) {
    const auto& s = *c.pbv_signature;
    out << "pbv.signature = " << quoted(shortest(s[0]) + "," + shortest(s[1]) + "," + shortest(s[2])) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

PreprocessOutcome cmd_preprocess(const RunConfig& config) {
  require_usable(config);
  const auto manifests = expand_manifests(config.manifests);
  if (manifests.empty()) fail(ErrorCode::kUsage, "manifest patterns matched nothing");
  fs::create_directories(config.output_dir);

  struct Entry {
    std::string id;
    std::size_t chunk_index;
    std::string chunk_file, chunk_sha, labels_file, labels_sha;
  };
  std::vector<std::vector<Entry>> per_recording(manifests.size());
  std::vector<std::optional<Exclusion>> failures(manifests.size());

  parallel_for(manifests.size(), config.jobs, [&](std::size_t i) {
    std::string id = manifests[i].string();
    std::string stage = "manifest";
    try {
      const RecordingManifest m = read_manifest(manifests[i]);
      id = m.id;
      stage = "load";
      const Recording rec = load_recording(m);
      stage = "labels";
      const auto aligned = align_labels(rec.labels, m.fps, rec.frames.n);
      stage = "chunk";
      const auto chunks = make_chunks(rec.frames, config.chunk_len, m.id);
      const auto labels = chunk_labels(aligned, config.chunk_len);
      stage = "cache";
      const fs::path dir = config.output_dir / "cache" / m.id;
      if (fs::exists(dir)) fs::remove_all(dir);
      const auto files = write_chunk_cache(chunks, labels, dir);
      for (std::size_t k = 0; k < files.size(); ++k) {
        per_recording[i].push_back({m.id, k, files[k].chunk_file.lexically_relative(config.output_dir).generic_string(),
                                    sha256_hex(files[k].chunk_file),
                                    files[k].labels_file.lexically_relative(config.output_dir).generic_string(),
                                    sha256_hex(files[k].labels_file)});
      }
    } catch (const std::exception& e) {
      failures[i] = Exclusion{id, stage, error_text(e)};
    }
  });

  PreprocessOutcome out;
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    if (failures[i]) {
      out.exclusions.push_back(*failures[i]);
    } else {
      ++out.recordings_ok;
      entries.insert(entries.end(), per_recording[i].begin(), per_recording[i].end());
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return std::tie(a.id, a.chunk_index) < std::tie(b.id, b.chunk_index); });
  out.chunks = entries.size();

  json index;
  index["format_version"] = 1;
  index["chunk_len"] = config.chunk_len;
  index["chunks"] = json::array();
  for (const auto& e : entries) {
    index["chunks"].push_back({{"recording", e.id},
                               {"chunk_index", e.chunk_index},
                               {"chunk_file", e.chunk_file},
                               {"chunk_sha256", e.chunk_sha},
                               {"labels_file", e.labels_file},
                               {"labels_sha256", e.labels_sha}});
  }
  out.index_file = config.output_dir / "index.json";
  write_text(out.index_file, index.dump(2) + "\n");
  std::sort(out.exclusions.begin(), out.exclusions.end(),
            [](const Exclusion& a, const Exclusion& b) { return a.video_id < b.video_id; });
  write_text(config.output_dir / "preprocess_exclusions.csv", format_exclusions_csv(out.exclusions));
  write_text(config.output_dir / "preprocess.resolved.toml", resolved_config_text(config));
  out.exit_code = out.recordings_ok > 0 ? kExitOk : kExitPartial;
  return out;
}

RunOutcome cmd_run(const RunConfig& config) {
  require_usable(config);
  const auto manifests = expand_manifests(config.manifests);
  if (manifests.empty()) fail(ErrorCode::kUsage, "manifest patterns matched nothing");
  fs::create_directories(config.output_dir);
  const MethodOptions options = method_options(config);

  std::vector<std::vector<VideoResult>> rows(manifests.size());
  std::vector<std::vector<Exclusion>> excluded(manifests.size());

  parallel_for(manifests.size(), config.jobs, [&](std::size_t i) {
    std::string id = manifests[i].string();
    std::string stage = "manifest";
    double hr_label = 0.0;
    RgbTrace trace;
    try {
      const RecordingManifest m = read_manifest(manifests[i]);
      id = m.id;
      stage = "load";
      Recording rec = load_recording(m);
      stage = "trace";
      trace = spatial_average(rec.frames, m.roi);
      rec.frames = {};
      std::size_t usable = trace.size();
      if (config.chunk_mode == ChunkMode::kChunk) {
        usable = (trace.size() / config.chunk_len) * config.chunk_len;
        if (usable == 0) fail(ErrorCode::kTooShort, "recording shorter than one chunk");
        trace = slice(trace, 0, usable);
      }
      stage = "labels";
      const auto aligned = align_labels(rec.labels, m.fps, usable);
      hr_label = label_hr(aligned, m.fps, config.post).bpm;
    } catch (const std::exception& e) {
      excluded[i].push_back({id, stage, error_text(e)});
      return;
    }

    for (Method method : config.methods) {
      std::string mstage = "method:" + std::string(to_string(method));
      try {
        std::vector<double> bvp;
        if (config.chunk_mode == ChunkMode::kVideo) {
          bvp = run_method(method, trace, options).samples;
        } else {
          for (std::size_t first = 0; first < trace.size(); first += config.chunk_len) {
            const auto part = run_method(method, slice(trace, first, config.chunk_len), options).samples;
            bvp.insert(bvp.end(), part.begin(), part.end());
          }
        }
        mstage = "hr:" + std::string(to_string(method));
        const double hr_pred = waveform_hr(bvp, trace.fps, config.post).bpm;
        rows[i].push_back({id, method, hr_pred, hr_label});
      } catch (const std::exception& e) {
        excluded[i].push_back({id, mstage, error_text(e)});
      }
    }
  });

  RunOutcome out;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    out.results.insert(out.results.end(), rows[i].begin(), rows[i].end());
    out.exclusions.insert(out.exclusions.end(), excluded[i].begin(), excluded[i].end());
  }
  std::sort(out.results.begin(), out.results.end(), [](const VideoResult& a, const VideoResult& b) {
    return std::tie(a.video_id, a.method) < std::tie(b.video_id, b.method);
  });
  std::stable_sort(out.exclusions.begin(), out.exclusions.end(),
                   [](const Exclusion& a, const Exclusion& b) { return a.video_id < b.video_id; });

  out.results_file = config.output_dir / "results.csv";
  write_text(out.results_file, format_results_csv(out.results));
  write_text(config.output_dir / "exclusions.csv", format_exclusions_csv(out.exclusions));
  write_text(config.output_dir / "run.resolved.toml", resolved_config_text(config));
  out.exit_code = out.exclusions.empty() ? kExitOk : kExitPartial;
  return out;
}

EvaluateOutcome cmd_evaluate(const fs::path& results_csv, const fs::path& output_dir) {
  const auto results = read_results_csv(results_csv);
  if (results.empty()) fail(ErrorCode::kUsage, "no results in " + results_csv.string());
  EvaluateOutcome out;
  out.reports = compute_all_metrics(results);
  out.csv = render_report(out.reports, ReportFormat::kCsv);
  out.markdown = render_report(out.reports, ReportFormat::kMarkdown);
  if (!output_dir.empty()) {
    fs::create_directories(output_dir);
    write_text(output_dir / "report.csv", out.csv);
    write_text(output_dir / "report.md", out.markdown);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synth batches

namespace {

std::array<double, 3> triple(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3) fail(ErrorCode::kConfigInvalid, std::string(key) + " needs 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void apply_synth_keys(SynthConfig& c, const json& obj, bool allow_id) {
  for (const auto& [key, v] : obj.items()) {
    if (key == "id" && allow_id) continue;
    if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (key == "duration_s") {
      c.duration_s = v.get<double>();
    } else if (key == "fps") {
      c.fps = v.get<double>();
    } else if (key == "hr_bpm") {
      if (v.is_array()) {
        if (v.size() != 2) fail(ErrorCode::kConfigInvalid, "hr_bpm ramp needs [start, end]");
        c.hr_start_bpm = v[0].get<double>();
        c.hr_end_bpm = v[1].get<double>();
      } else {
        c.hr_start_bpm = c.hr_end_bpm = v.get<double>();
      }
    } else if (key == "pulse_shape") {
      const auto s = v.get<std::string>();
      if (s == "sine") {
        c.pulse_shape = PulseShape::kSine;
      } else if (s == "asymmetric") {
        c.pulse_shape = PulseShape::kAsymmetric;
      } else {
        fail(ErrorCode::kConfigInvalid, "pulse_shape must be 'sine' or 'asymmetric'");
      }
    } else if (key == "pulse_signature") {
      c.pulse_signature = triple(v, "pulse_signature");
    } else if (key == "pulse_amplitude") {
      c.pulse_amplitude = v.get<double>();
    } else if (key == "baseline_rgb") {
      c.baseline_rgb = triple(v, "baseline_rgb");
    } else if (key == "illum_amplitude") {
      c.illum_amplitude = v.get<double>();
    } else if (key == "illum_freq_hz") {
      c.illum_freq_hz = v.get<double>();
    } else if (key == "noise_std") {
      c.noise_std = v.get<double>();
    } else if (key == "frame_size") {
      if (!v.is_array() || v.size() != 2) fail(ErrorCode::kConfigInvalid, "frame_size needs [H, W]");
      c.height = v[0].get<std::size_t>();
      c.width = v[1].get<std::size_t>();
    } else {
      fail(ErrorCode::kConfigInvalid, "unknown synth key '" + key + "'");
    }
  }
}

}  // namespace

std::vector<SynthJob> parse_synth_batch(const std::string& text, std::optional<std::uint64_t> seed_override) {
  std::vector<SynthJob> jobs;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) fail(ErrorCode::kConfigInvalid, "synth batch must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
      if (key != "defaults" && key != "recordings" && key != "sweep") {
        fail(ErrorCode::kConfigInvalid, "unknown top-level key '" + key + "'");
      }
    }
    SynthConfig defaults;
    if (doc.contains("defaults")) apply_synth_keys(defaults, doc["defaults"], false);
    if (seed_override) defaults.seed = *seed_override;
    const std::uint64_t base_seed = defaults.seed;

    if (doc.contains("recordings")) {
      for (const auto& r : doc["recordings"]) {
        SynthJob job{r.at("id").get<std::string>(), defaults};
        job.config.seed = base_seed + jobs.size();
        apply_synth_keys(job.config, r, true);
        jobs.push_back(std::move(job));
      }
    }
    if (doc.contains("sweep")) {
      const auto& s = doc["sweep"];
      const auto count = s.at("count").get<std::size_t>();
      const double lo = s.at("hr_min_bpm").get<double>();
      const double hi = s.at("hr_max_bpm").get<double>();
      const std::string prefix = s.value("id_prefix", std::string("syn"));
      for (std::size_t i = 0; i < count; ++i) {
        SynthJob job;
        char name[32];
        std::snprintf(name, sizeof(name), "_%03zu", i);
        job.id = prefix + name;
        job.config = defaults;
        job.config.seed = base_seed + jobs.size();
        const double hr = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        job.config.hr_start_bpm = job.config.hr_end_bpm = hr;
        jobs.push_back(std::move(job));
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigInvalid, e.what());
  }
  if (jobs.empty()) fail(ErrorCode::kUsage, "synth batch defines no recordings");
  std::set<std::string> ids;
  for (const auto& j : jobs) {
    if (j.id.empty() || j.id.find_first_of("/\\") != std::string::npos) {
      fail(ErrorCode::kConfigInvalid, "invalid recording id '" + j.id + "'");
    }
    if (!ids.insert(j.id).second) fail(ErrorCode::kConfigInvalid, "duplicate recording id '" + j.id + "'");
    validate(j.config);
  }
  return jobs;
}

SynthOutcome cmd_synth(const fs::path& batch_file, const fs::path& output_dir, std::optional<std::uint64_t> seed_override,
                       std::size_t jobs) {
  std::ifstream in(batch_file, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingPath, batch_file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto batch = parse_synth_batch(buf.str(), seed_override);

  SynthOutcome out;
  out.manifests.resize(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t i) {
    const fs::path dir = output_dir / batch[i].id;
    write_synthetic_recording(batch[i].config, batch[i].id, dir);
    out.manifests[i] = dir / "manifest.json";
  });
  return out;
}

}  // namespace rppg
