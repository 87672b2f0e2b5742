#include <algorithm>
#include <cmath>
#include <fstream>

#include <png.h>

#include "binary_io.hpp"
#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"

namespace rppg {

namespace fs = std::filesystem;

namespace detail {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingPath, path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kMissingPath, path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kMissingPath, "write failed: " + path);
}

}  // namespace detail

namespace {

constexpr char kFramesMagic[5] = "RPGF";
constexpr std::size_t kFramesHeaderBytes = 20;

}  // namespace

void write_frames_bin(const FrameSequence& frames, const fs::path& path) {
  std::vector<unsigned char> bytes;
  bytes.reserve(kFramesHeaderBytes + frames.data.size() * 4);
  detail::put_magic(bytes, kFramesMagic);
  detail::put_u32(bytes, 1);
  detail::put_u32(bytes, static_cast<std::uint32_t>(frames.n));
  detail::put_u32(bytes, static_cast<std::uint32_t>(frames.height));
  detail::put_u32(bytes, static_cast<std::uint32_t>(frames.width));
  for (double v : frames.data) detail::put_f32(bytes, static_cast<float>(v));
  detail::write_file(path.string(), bytes);
}

FrameSequence read_frames_bin(const fs::path& path, double fps) {
  const auto bytes = detail::read_file(path.string());
  if (bytes.size() < kFramesHeaderBytes) fail(ErrorCode::kTruncatedFile, path.string());
  if (!detail::has_magic(bytes.data(), kFramesMagic)) fail(ErrorCode::kBadMagic, path.string());
  if (detail::get_u32(bytes.data() + 4) != 1) fail(ErrorCode::kVersionMismatch, path.string());
  FrameSequence frames;
  frames.fps = fps;
  frames.n = detail::get_u32(bytes.data() + 8);
  frames.height = detail::get_u32(bytes.data() + 12);
  frames.width = detail::get_u32(bytes.data() + 16);
  const std::size_t count = frames.n * frames.height * frames.width * 3;
  if (bytes.size() != kFramesHeaderBytes + count * 4) fail(ErrorCode::kTruncatedFile, path.string());
  frames.data.resize(count);
  const std::size_t per_frame = frames.frame_stride();
  for (std::size_t i = 0; i < count; ++i) {
    const float v = detail::get_f32(bytes.data() + kFramesHeaderBytes + 4 * i);
    if (!(v >= 0.0f && v <= 1.0f)) {
      fail(ErrorCode::kCorruptFrame, path.string() + ": frame " + std::to_string(i / per_frame) + " out of [0,1]");
    }
    frames.data[i] = v;
  }
  return frames;
}

void write_png_frame(const FrameSequence& frames, std::size_t index, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frames.width);
  image.height = static_cast<png_uint_32>(frames.height);
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(frames.frame_stride());
  const double* src = &frames.data[frames.index(index, 0, 0, 0)];
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<png_byte>(std::lround(std::clamp(src[i], 0.0, 1.0) * 255.0));
  }
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::kMissingPath, path.string() + ": " + msg);
  }
}

FrameSequence read_png_directory(const fs::path& dir, double fps) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  // Zero-padded names make lexical order equal frame order.
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::kMissingPath, dir.string() + ": no frames");

  FrameSequence frames;
  frames.fps = fps;
  frames.n = files.size();
  std::vector<png_byte> buffer;
  for (std::size_t k = 0; k < files.size(); ++k) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, files[k].string().c_str())) {
      fail(ErrorCode::kCorruptFrame, "frame " + std::to_string(k) + " (" + files[k].string() + "): " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    if (k == 0) {
      frames.height = image.height;
      frames.width = image.width;
      frames.data.resize(frames.n * frames.frame_stride());
      buffer.resize(frames.frame_stride());
    } else if (image.height != frames.height || image.width != frames.width) {
      png_image_free(&image);
      fail(ErrorCode::kCorruptFrame, "frame " + std::to_string(k) + ": size differs from frame 0");
    }
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
      const std::string msg = image.message;
      png_image_free(&image);
      fail(ErrorCode::kCorruptFrame, "frame " + std::to_string(k) + ": " + msg);
    }
    double* dst = &frames.data[frames.index(k, 0, 0, 0)];
    for (std::size_t i = 0; i < buffer.size(); ++i) dst[i] = buffer[i] / 255.0;
  }
  return frames;
}

}  // namespace rppg
