#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rppg {

// Declaration order is the canonical report row order.
enum class Method : std::uint8_t { kGreen, kIca, kChrom, kPos, kPbv, kLgi };

inline constexpr std::array<Method, 6> kAllMethods = {
    Method::kGreen, Method::kIca, Method::kChrom, Method::kPos, Method::kPbv, Method::kLgi};

std::string_view to_string(Method method);
// Throws Error(kConfigInvalid) for unknown names.
Method parse_method(std::string_view name);

struct Roi {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Decoded video in [N, H, W, 3] order, values in [0, 1].
struct FrameSequence {
  std::size_t n = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double fps = 0.0;
  std::vector<double> data;

  std::size_t index(std::size_t frame, std::size_t y, std::size_t x, std::size_t c) const {
    return ((frame * height + y) * width + x) * 3 + c;
  }
  double at(std::size_t frame, std::size_t y, std::size_t x, std::size_t c) const {
    return data[index(frame, y, x, c)];
  }
  std::size_t frame_stride() const { return height * width * 3; }
};

/// Contact PPG samples at their native rate.
struct LabelSeries {
  std::vector<double> samples;
  double rate = 0.0;
};

/// Per-frame spatial RGB means.
struct RgbTrace {
  std::vector<double> r;
  std::vector<double> g;
  std::vector<double> b;
  double fps = 0.0;

  std::size_t size() const { return g.size(); }
  std::span<const double> channel(std::size_t c) const {
    return c == 0 ? std::span<const double>(r) : c == 1 ? std::span<const double>(g) : std::span<const double>(b);
  }
};

enum BvpFlag : std::uint32_t {
  kBvpNone = 0,
  kBvpZeroDenominator = 1u << 0,    // CHROM: std(Y) vanished
  kBvpRidgeRegularized = 1u << 1,   // PBV: near-singular covariance
  kBvpRankDeficient = 1u << 2,      // ICA: fell back to green
  kBvpLuminanceOnly = 1u << 3,      // CHROM/POS: nothing left after luminance rejection
};

struct BvpSignal {
  std::vector<double> samples;
  double fps = 0.0;
  Method method = Method::kGreen;
  std::uint32_t flags = kBvpNone;

  bool has_flag(BvpFlag f) const { return (flags & f) != 0; }
};

enum class HrSource : std::uint8_t { kPrediction, kLabel };

struct HrEstimate {
  double bpm = 0.0;
  double band_low_bpm = 45.0;
  double band_high_bpm = 150.0;
  Method method = Method::kGreen;
  HrSource source = HrSource::kPrediction;
};

}  // namespace rppg
