#include <algorithm>
#include <charconv>

#include "binary_io.hpp"
#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"

namespace rppg {

namespace fs = std::filesystem;

namespace {

constexpr char kChunkMagic[5] = "RPGC";
constexpr char kLabelMagic[5] = "RPGL";

}  // namespace

std::vector<CachedChunkFiles> write_chunk_cache(std::span<const VideoChunk> chunks,
                                                std::span<const std::vector<float>> labels, const fs::path& dir) {
  if (labels.size() != chunks.size()) {
    fail(ErrorCode::kConfigInvalid, "chunk/label count mismatch");
  }
  fs::create_directories(dir);
  std::vector<CachedChunkFiles> written;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const VideoChunk& c = chunks[k];
    std::vector<unsigned char> bytes;
    bytes.reserve(kChunkHeaderBytes + 4 * c.data.size());
    detail::put_magic(bytes, kChunkMagic);
    detail::put_u32(bytes, kCacheVersion);
    detail::put_u32(bytes, static_cast<std::uint32_t>(c.length));
    detail::put_u32(bytes, static_cast<std::uint32_t>(c.height));
    detail::put_u32(bytes, static_cast<std::uint32_t>(c.width));
    detail::put_u32(bytes, static_cast<std::uint32_t>(kChunkChannels));
    for (float v : c.data) detail::put_f32(bytes, v);

    std::vector<unsigned char> lbytes;
    lbytes.reserve(kLabelHeaderBytes + 4 * labels[k].size());
    detail::put_magic(lbytes, kLabelMagic);
    detail::put_u32(lbytes, kCacheVersion);
    detail::put_u32(lbytes, static_cast<std::uint32_t>(labels[k].size()));
    for (float v : labels[k]) detail::put_f32(lbytes, v);

    CachedChunkFiles files{dir / ("chunk_" + std::to_string(k) + ".rpc"),
                           dir / ("labels_" + std::to_string(k) + ".rpl")};
    detail::write_file(files.chunk_file.string(), bytes);
    detail::write_file(files.labels_file.string(), lbytes);
    written.push_back(std::move(files));
  }
  return written;
}

VideoChunk read_chunk_file(const fs::path& path) {
  const auto bytes = detail::read_file(path.string());
  if (bytes.size() < 4) fail(ErrorCode::kTruncatedFile, path.string());
  if (!detail::has_magic(bytes.data(), kChunkMagic)) fail(ErrorCode::kBadMagic, path.string());
  if (bytes.size() < kChunkHeaderBytes) fail(ErrorCode::kTruncatedFile, path.string());
  if (detail::get_u32(bytes.data() + 4) != kCacheVersion) fail(ErrorCode::kVersionMismatch, path.string());
  VideoChunk c;
  c.length = detail::get_u32(bytes.data() + 8);
  c.height = detail::get_u32(bytes.data() + 12);
  c.width = detail::get_u32(bytes.data() + 16);
  if (detail::get_u32(bytes.data() + 20) != kChunkChannels) {
    fail(ErrorCode::kVersionMismatch, path.string() + ": channel count is not 6");
  }
  const std::size_t count = c.length * c.height * c.width * kChunkChannels;
  if (bytes.size() != kChunkHeaderBytes + 4 * count) fail(ErrorCode::kTruncatedFile, path.string());
  c.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) c.data[i] = detail::get_f32(bytes.data() + kChunkHeaderBytes + 4 * i);
  return c;
}

std::vector<float> read_label_file(const fs::path& path) {
  const auto bytes = detail::read_file(path.string());
  if (bytes.size() < 4) fail(ErrorCode::kTruncatedFile, path.string());
  if (!detail::has_magic(bytes.data(), kLabelMagic)) fail(ErrorCode::kBadMagic, path.string());
  if (bytes.size() < kLabelHeaderBytes) fail(ErrorCode::kTruncatedFile, path.string());
  if (detail::get_u32(bytes.data() + 4) != kCacheVersion) fail(ErrorCode::kVersionMismatch, path.string());
  const std::size_t len = detail::get_u32(bytes.data() + 8);
  if (bytes.size() != kLabelHeaderBytes + 4 * len) fail(ErrorCode::kTruncatedFile, path.string());
  std::vector<float> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = detail::get_f32(bytes.data() + kLabelHeaderBytes + 4 * i);
  return out;
}

ChunkCache read_chunk_cache(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::kMissingPath, dir.string());
  std::vector<std::size_t> indices;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("chunk_") || entry.path().extension() != ".rpc") continue;
    const std::string digits = name.substr(6, name.size() - 6 - 4);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) indices.push_back(k);
  }
  std::sort(indices.begin(), indices.end());

  ChunkCache cache;
  const std::string source = dir.filename().string();
  for (std::size_t k : indices) {
    VideoChunk c = read_chunk_file(dir / ("chunk_" + std::to_string(k) + ".rpc"));
    c.source_id = source;
    c.chunk_index = k;
    cache.chunks.push_back(std::move(c));
    cache.labels.push_back(read_label_file(dir / ("labels_" + std::to_string(k) + ".rpl")));
  }
  return cache;
}

}  // namespace rppg
