#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rppg/ingestion.hpp"
#include "rppg/types.hpp"

namespace rppg {

enum class PulseShape : std::uint8_t {
  kSine,
  // Fundamental plus a second harmonic at a fixed phase, rescaled to unit peak.
  kAsymmetric,
};

/// Synthetic recording parameters. Pixel model per channel c at frame k:
///   baseline_c * (1 + pulse_amplitude * signature_c * p(t_k)
///                   + illum_amplitude * sin(2 pi illum_freq_hz t_k))
/// plus independent Gaussian noise of std noise_std per pixel and channel,
/// clamped to [0, 1].
///
/// Noise is drawn from std::mt19937_64 (bit-exact across platforms) seeded
/// per frame with splitmix64(seed XOR frame_index); normals come from the
/// Box-Muller transform on 53-bit uniforms.
struct SynthConfig {
  std::uint64_t seed = 0;
  double duration_s = 20.0;
  double fps = 30.0;
  double hr_start_bpm = 72.0;
  double hr_end_bpm = 72.0;  // equal to start for a constant rate
  PulseShape pulse_shape = PulseShape::kSine;
  std::array<double, 3> pulse_signature = {0.33, 0.77, 0.53};
  double pulse_amplitude = 0.005;
  std::array<double, 3> baseline_rgb = {0.60, 0.45, 0.35};
  double illum_amplitude = 0.0;
  double illum_freq_hz = 0.2;
  double noise_std = 0.0;
  std::size_t height = 64;
  std::size_t width = 64;

  std::size_t frame_count() const;
};

/// Throws kConfigInvalid when an invariant fails, including any noiseless
/// pixel value leaving [0, 1].
void validate(const SynthConfig& config);

struct SynthTrace {
  RgbTrace trace;
  std::vector<double> ground_truth_ppg;
  double true_hr_bpm = 0.0;  // mean rate over the clip for ramps
};

SynthTrace synth_trace(const SynthConfig& config);

FrameSequence synth_video(const SynthConfig& config);

/// Writes `frames.bin`, `labels.csv` and `manifest.json` into `dir` and
/// returns the manifest (dataset kind synthetic, label_rate = fps).
RecordingManifest write_synthetic_recording(const SynthConfig& config, const std::string& id,
                                            const std::filesystem::path& dir);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rppg
