#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rppg/types.hpp"

namespace rppg {

/// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct BandpassDesign {
  int order = 2;
  double low_hz = 0.75;
  double high_hz = 2.5;
  double fs = 30.0;
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  BandpassDesign design;

  /// H(e^{j 2 pi f / fs}) evaluated section by section.
  std::complex<double> response(double freq_hz) const;
  /// Poles of every section.
  std::vector<std::complex<double>> poles() const;
  /// Total transfer function order (2 per section).
  int transfer_order() const { return static_cast<int>(2 * sections.size()); }
};

/// Butterworth bandpass: analog prototype of `order` poles, lowpass-to-bandpass
/// transform at the prewarped edges, bilinear transform. Yields `order`
/// biquads normalized to unit gain at the digital center frequency.
BiquadCascade design_bandpass(const BandpassDesign& design);

/// Same as design_bandpass but memoized per (order, band, fs).
const BiquadCascade& cached_bandpass(const BandpassDesign& design);

/// Single causal pass through the cascade (transposed direct form II).
std::vector<double> sosfilt(const BiquadCascade& filter, std::span<const double> x);

/// Zero-phase forward-backward filtering with odd-reflection padding of
/// 3 * transfer_order samples and steady-state section initial conditions.
std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x);

inline constexpr double kDefaultDetrendLambda = 100.0;

/// Smoothness-priors detrending: x minus the solution of
/// (I + lambda^2 D2' D2) z = x.
std::vector<double> detrend(std::span<const double> x, double lambda = kDefaultDetrendLambda);

struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> power;
  std::size_t nfft = 0;
  double fs = 0.0;

  double resolution_hz() const { return fs / static_cast<double>(nfft); }
};

inline constexpr std::size_t kDefaultPadFactor = 8;

/// One-sided |FFT|^2 of the mean-removed signal, zero padded to the next
/// power of two >= pad_factor * N.
Spectrum periodogram(std::span<const double> x, double fs, std::size_t pad_factor = kDefaultPadFactor);

struct HrBand {
  double low_hz = 0.75;
  double high_hz = 2.5;
};

/// Argmax of the periodogram restricted to the band, in beats per minute.
HrEstimate estimate_hr(std::span<const double> x, double fs, const HrBand& band = {},
                       std::size_t pad_factor = kDefaultPadFactor);

/// Shared by predictions and labels so both go through one code path.
struct PostprocessConfig {
  int filter_order = 2;
  double low_hz = 0.75;
  double high_hz = 2.5;
  bool detrend_enabled = true;
  double detrend_lambda = kDefaultDetrendLambda;
  std::size_t pad_factor = kDefaultPadFactor;
};

/// detrend (optional) -> zero-phase bandpass -> filtered signal.
std::vector<double> postprocess(std::span<const double> x, double fs, const PostprocessConfig& config = {});

/// postprocess followed by estimate_hr over the filter band.
HrEstimate waveform_hr(std::span<const double> x, double fs, const PostprocessConfig& config = {});

}  // namespace rppg
