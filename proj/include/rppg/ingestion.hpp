#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

enum class DatasetKind : std::uint8_t { kUbfc, kPure, kScamps, kGeneric, kSynthetic };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

/// One recording on disk. Relative paths are resolved against the directory
/// of the manifest file they were read from.
struct RecordingManifest {
  std::string id;
  std::filesystem::path frames_path;
  std::filesystem::path labels_path;
  double fps = 0.0;
  double label_rate = 0.0;
  DatasetKind dataset_kind = DatasetKind::kGeneric;
  std::optional<Roi> roi;
};

// Throws kInvalidManifest on missing/unknown keys and kRateMismatch on
// non-positive rates.
RecordingManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const RecordingManifest& manifest, const std::filesystem::path& path);
void validate_manifest(const RecordingManifest& manifest);

struct Recording {
  FrameSequence frames;
  LabelSeries labels;
};

/// Loads frames and labels using the convention of `manifest.dataset_kind`.
///
/// Frames are read from either a `frames.bin` raw tensor or a directory of
/// numbered PNG files. Label conventions:
///   generic, synthetic, scamps: single-column CSV, optional header
///   ubfc: `ground_truth.txt` (first whitespace-separated row is PPG) or the
///         4-column `gtdump.xmp` CSV (PPG in the last column)
///   pure: the JSON export with `/FullPackage` waveform entries; `/Image`
///         timestamps, when present, are checked against the declared fps
Recording load_recording(const RecordingManifest& manifest);

/// Linear interpolation of labels onto t_k = k / fps, k < n_frames.
std::vector<double> align_labels(const LabelSeries& labels, double fps, std::size_t n_frames);

RgbTrace spatial_average(const FrameSequence& frames, const std::optional<Roi>& roi = std::nullopt);

/// Consecutive-difference ratio (x[k+1]-x[k])/(x[k+1]+x[k]), scaled to unit
/// population std, last element 0.
std::vector<double> diff_normalize(std::span<const double> series);

/// (x - mean) / std_pop, all zeros when the series has no variance.
std::vector<double> standardize(std::span<const double> series);

inline constexpr std::size_t kDefaultChunkLen = 180;
inline constexpr std::size_t kChunkChannels = 6;

/// [chunk_len, H, W, 6]: channels 0-2 difference-normalized, 3-5 standardized.
struct VideoChunk {
  std::size_t length = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;
  std::string source_id;
  std::size_t chunk_index = 0;

  std::size_t index(std::size_t frame, std::size_t y, std::size_t x, std::size_t c) const {
    return ((frame * height + y) * width + x) * kChunkChannels + c;
  }
  friend bool operator==(const VideoChunk&, const VideoChunk&) = default;
};

std::vector<VideoChunk> make_chunks(const FrameSequence& frames, std::size_t chunk_len = kDefaultChunkLen,
                                    const std::string& source_id = {});

/// Splits aligned labels into the same non-overlapping windows as make_chunks.
std::vector<std::vector<float>> chunk_labels(std::span<const double> aligned, std::size_t chunk_len);

// Raw tensor and image IO.
void write_frames_bin(const FrameSequence& frames, const std::filesystem::path& path);
FrameSequence read_frames_bin(const std::filesystem::path& path, double fps);
void write_png_frame(const FrameSequence& frames, std::size_t index, const std::filesystem::path& path);
FrameSequence read_png_directory(const std::filesystem::path& dir, double fps);

void write_label_csv(std::span<const double> samples, const std::filesystem::path& path);
std::vector<double> read_label_csv(const std::filesystem::path& path);

// Chunk cache (`chunk_<k>.rpc`, `labels_<k>.rpl`).
inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::size_t kChunkHeaderBytes = 24;
inline constexpr std::size_t kLabelHeaderBytes = 12;

struct CachedChunkFiles {
  std::filesystem::path chunk_file;
  std::filesystem::path labels_file;
};

std::vector<CachedChunkFiles> write_chunk_cache(std::span<const VideoChunk> chunks,
                                                std::span<const std::vector<float>> labels,
                                                const std::filesystem::path& dir);

struct ChunkCache {
  std::vector<VideoChunk> chunks;
  std::vector<std::vector<float>> labels;
};

ChunkCache read_chunk_cache(const std::filesystem::path& dir);
VideoChunk read_chunk_file(const std::filesystem::path& path);
std::vector<float> read_label_file(const std::filesystem::path& path);

}  // namespace rppg
