#include "rppg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rppg/error.hpp"
#include "rppg/methods.hpp"

namespace rppg {

namespace fs = std::filesystem;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::size_t SynthConfig::frame_count() const { return static_cast<std::size_t>(std::llround(duration_s * fps)); }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHarmonicWeight = 0.4;
constexpr double kHarmonicPhase = std::numbers::pi / 4.0;

double asymmetric_peak() {
  static const double peak = [] {
    double m = 0.0;
    for (int i = 0; i < 8192; ++i) {
      const double phi = kTwoPi * i / 8192.0;
      m = std::max(m, std::abs(std::sin(phi) + kHarmonicWeight * std::sin(2.0 * phi + kHarmonicPhase)));
    }
    return m;
  }();
  return peak;
}

double pulse_value(PulseShape shape, double phase) {
  if (shape == PulseShape::kSine) return std::sin(phase);
  return (std::sin(phase) + kHarmonicWeight * std::sin(2.0 * phase + kHarmonicPhase)) / asymmetric_peak();
}

// Phase of a linear frequency ramp from f0 to f1 over `duration` seconds.
double pulse_phase(const SynthConfig& c, double t) {
  const double f0 = c.hr_start_bpm / 60.0;
  const double f1 = c.hr_end_bpm / 60.0;
  return kTwoPi * (f0 * t + 0.5 * (f1 - f0) * t * t / c.duration_s);
}

struct Model {
  std::array<double, 3> signature;
  std::vector<double> pulse;   // p(t_k)
  std::vector<double> illum;   // m(t_k)
};

Model build_model(const SynthConfig& c) {
  Model m;
  m.signature = PbvSignature(c.pulse_signature).vector();
  const std::size_t n = c.frame_count();
  m.pulse.resize(n);
  m.illum.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / c.fps;
    m.pulse[k] = pulse_value(c.pulse_shape, pulse_phase(c, t));
    m.illum[k] = std::sin(kTwoPi * c.illum_freq_hz * t);
  }
  return m;
}

double channel_value(const SynthConfig& c, const Model& m, std::size_t ch, std::size_t k) {
  return c.baseline_rgb[ch] * (1.0 + c.pulse_amplitude * m.signature[ch] * m.pulse[k] + c.illum_amplitude * m.illum[k]);
}

// Uniform in (0, 1] from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

}  // namespace

void validate(const SynthConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorCode::kConfigInvalid, what); };
  for (double hr : {c.hr_start_bpm, c.hr_end_bpm}) {
    if (!(hr >= 45.0 && hr <= 150.0)) bad("hr_bpm must lie in [45, 150]");
  }
  if (!(c.fps >= 15.0)) bad("fps must be >= 15");
  if (!(c.duration_s >= 8.0)) bad("duration_s must be >= 8");
  if (!(c.illum_freq_hz >= 0.0 && c.illum_freq_hz < 0.5)) bad("illum_freq_hz must lie in [0, 0.5)");
  if (!(c.pulse_amplitude >= 0.0) || !(c.illum_amplitude >= 0.0)) bad("amplitudes must be non-negative");
  if (!(c.noise_std >= 0.0)) bad("noise_std must be non-negative");
  if (c.height == 0 || c.width == 0) bad("frame size must be positive");
  for (double b : c.baseline_rgb) {
    if (!(b > 0.0 && b < 1.0)) bad("baseline_rgb components must lie in (0, 1)");
  }
  const auto sig = PbvSignature(c.pulse_signature).vector();
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const double swing = c.pulse_amplitude * sig[ch] + c.illum_amplitude;
    if (c.baseline_rgb[ch] * (1.0 + swing) > 1.0 || c.baseline_rgb[ch] * (1.0 - swing) < 0.0) {
      bad("pulse and illumination amplitudes push channel " + std::to_string(ch) + " outside [0, 1]");
    }
  }
}

SynthTrace synth_trace(const SynthConfig& c) {
  validate(c);
  const Model m = build_model(c);
  const std::size_t n = c.frame_count();
  SynthTrace out;
  out.trace.fps = c.fps;
  for (auto* ch : {&out.trace.r, &out.trace.g, &out.trace.b}) ch->resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.trace.r[k] = channel_value(c, m, 0, k);
    out.trace.g[k] = channel_value(c, m, 1, k);
    out.trace.b[k] = channel_value(c, m, 2, k);
  }
  out.ground_truth_ppg = m.pulse;
  out.true_hr_bpm = 0.5 * (c.hr_start_bpm + c.hr_end_bpm);
  return out;
}

FrameSequence synth_video(const SynthConfig& c) {
  validate(c);
  const Model m = build_model(c);
  FrameSequence f;
  f.n = c.frame_count();
  f.height = c.height;
  f.width = c.width;
  f.fps = c.fps;
  f.data.resize(f.n * f.frame_stride());
  const std::size_t pixels = c.height * c.width;
  for (std::size_t k = 0; k < f.n; ++k) {
    const double base[3] = {channel_value(c, m, 0, k), channel_value(c, m, 1, k), channel_value(c, m, 2, k)};
    double* dst = &f.data[f.index(k, 0, 0, 0)];
    if (c.noise_std == 0.0) {
      for (std::size_t p = 0; p < pixels; ++p) {
        for (std::size_t ch = 0; ch < 3; ++ch) dst[3 * p + ch] = base[ch];
      }
      continue;
    }
    std::mt19937_64 rng(splitmix64(c.seed ^ static_cast<std::uint64_t>(k)));
    const std::size_t count = 3 * pixels;
    for (std::size_t i = 0; i < count; i += 2) {
      const double radius = c.noise_std * std::sqrt(-2.0 * std::log(uniform01(rng)));
      const double angle = kTwoPi * uniform01(rng);
      dst[i] = std::clamp(base[i % 3] + radius * std::cos(angle), 0.0, 1.0);
      if (i + 1 < count) dst[i + 1] = std::clamp(base[(i + 1) % 3] + radius * std::sin(angle), 0.0, 1.0);
    }
  }
  return f;
}

RecordingManifest write_synthetic_recording(const SynthConfig& c, const std::string& id, const fs::path& dir) {
  const FrameSequence frames = synth_video(c);
  const SynthTrace truth = synth_trace(c);
  fs::create_directories(dir);
  write_frames_bin(frames, dir / "frames.bin");
  write_label_csv(truth.ground_truth_ppg, dir / "labels.csv");
  RecordingManifest m;
  m.id = id;
  m.frames_path = dir / "frames.bin";
  m.labels_path = dir / "labels.csv";
  m.fps = c.fps;
  m.label_rate = c.fps;
  m.dataset_kind = DatasetKind::kSynthetic;
  write_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace rppg
