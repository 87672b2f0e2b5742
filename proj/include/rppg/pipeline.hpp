#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rppg/dsp.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/synth.hpp"
#include "rppg/types.hpp"

namespace rppg {

enum class ChunkMode : std::uint8_t {
  kVideo,  // methods see the whole trace
  kChunk,  // methods run per chunk_len window; outputs are stitched before HR
};

std::string_view to_string(ChunkMode mode);
ChunkMode parse_chunk_mode(std::string_view name);

struct RunConfig {
  std::vector<std::string> manifests;  // paths or glob patterns
  std::vector<Method> methods;
  PostprocessConfig post;
  ChunkMode chunk_mode = ChunkMode::kVideo;
  std::size_t chunk_len = kDefaultChunkLen;
  std::filesystem::path output_dir = "rppg_out";
  std::size_t jobs = 0;  // 0: hardware concurrency
  std::uint64_t seed = 0;
  std::optional<std::array<double, 3>> pbv_signature;
};

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

/// Expands glob patterns; literal paths must exist. Sorted, de-duplicated.
std::vector<std::filesystem::path> expand_manifests(const std::vector<std::string>& patterns);

/// TOML key/value text with every key, defaults included. Loadable again
/// through `--config`.
std::string resolved_config_text(const RunConfig& config);

struct PreprocessOutcome {
  int exit_code = kExitOk;
  std::size_t recordings_ok = 0;
  std::size_t chunks = 0;
  std::vector<Exclusion> exclusions;
  std::filesystem::path index_file;
};

/// load -> align labels -> chunk -> cache for every manifest, then
/// `index.json` with SHA-256 of every cache file. Exit code 0 when at least
/// one recording succeeded.
PreprocessOutcome cmd_preprocess(const RunConfig& config);

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<VideoResult> results;
  std::vector<Exclusion> exclusions;
  std::filesystem::path results_file;
};

/// trace -> method -> postprocess -> HR per (recording, method), plus label
/// HR; writes `results.csv`, `exclusions.csv` and the resolved config.
RunOutcome cmd_run(const RunConfig& config);

struct EvaluateOutcome {
  std::vector<MetricsReport> reports;
  std::string csv;
  std::string markdown;
};

/// Writes `report.csv` and `report.md` into output_dir (when non-empty).
EvaluateOutcome cmd_evaluate(const std::filesystem::path& results_csv, const std::filesystem::path& output_dir);

/// Synth batch file (JSON):
///   { "defaults": {<SynthConfig keys>},
///     "recordings": [{"id": "...", <overrides>}, ...],
///     "sweep": {"count": n, "hr_min_bpm": a, "hr_max_bpm": b, "id_prefix": "syn"} }
/// SynthConfig keys: seed, duration_s, fps, hr_bpm (number or [start, end]),
/// pulse_shape ("sine" | "asymmetric"), pulse_signature [3],
/// pulse_amplitude, baseline_rgb [3], illum_amplitude, illum_freq_hz,
/// noise_std, frame_size [H, W].
struct SynthJob {
  std::string id;
  SynthConfig config;
};
std::vector<SynthJob> parse_synth_batch(const std::string& json_text, std::optional<std::uint64_t> seed_override);

struct SynthOutcome {
  std::vector<std::filesystem::path> manifests;
};

/// Validates every job before writing anything; each recording goes to
/// output_dir/<id>/.
SynthOutcome cmd_synth(const std::filesystem::path& batch_file, const std::filesystem::path& output_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt, std::size_t jobs = 0);

/// Runs fn(i) for i in [0, count) on at most `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::string sha256_hex(const std::filesystem::path& file);

}  // namespace rppg
