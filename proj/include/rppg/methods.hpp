#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rppg/dsp.hpp"
#include "rppg/types.hpp"

namespace rppg {

/// Relative R, G, B pulsatile amplitudes, unit norm, non-negative.
class PbvSignature {
 public:
  /// Normalizes `v`; throws kConfigInvalid for negative or all-zero input.
  explicit PbvSignature(const std::array<double, 3>& v);

  const std::array<double, 3>& vector() const { return v_; }

 private:
  std::array<double, 3> v_;
};

/// Fixed POS projection plane; both rows are orthogonal to (1, 1, 1).
struct PosConstants {
  static constexpr std::array<std::array<int, 3>, 2> kProjection = {{{0, 1, -1}, {-2, 1, 1}}};
  static constexpr double kWindowSeconds = 1.6;
};

/// CHROM chrominance coefficients: X = 3R - 2G, Y = 1.5R + G - 1.5B.
struct ChromConstants {
  static constexpr std::array<double, 3> kX = {3.0, -2.0, 0.0};
  static constexpr std::array<double, 3> kY = {1.5, 1.0, -1.5};
};

BvpSignal green_bvp(const RgbTrace& trace);

BvpSignal chrom_bvp(const RgbTrace& trace, double fs, const BandpassDesign& band = {});

BvpSignal pos_bvp(const RgbTrace& trace, double fs);

BvpSignal pbv_bvp(const RgbTrace& trace, const std::optional<PbvSignature>& signature = std::nullopt);

/// Rank-1 removal used by LGI: u is the first left singular vector of `m`,
/// P = I - u u', F = P m.
struct LgiProjection {
  Eigen::Vector3d u;
  Eigen::Matrix3d projector;
  Eigen::Matrix<double, 3, Eigen::Dynamic> projected;
};
LgiProjection lgi_project(const Eigen::Matrix<double, 3, Eigen::Dynamic>& m);

BvpSignal lgi_bvp(const RgbTrace& trace);

BvpSignal ica_bvp(const RgbTrace& trace, double fs, const HrBand& band = {});

struct MethodOptions {
  std::optional<PbvSignature> pbv_signature;
  BandpassDesign chrom_band{};  // fs is replaced by the trace rate
  HrBand ica_band{};
};

/// Dispatches on `method` using trace.fps as the sampling rate.
BvpSignal run_method(Method method, const RgbTrace& trace, const MethodOptions& options = {});

}  // namespace rppg
