#include <doctest.h>

#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"
#include "rppg/methods.hpp"
#include "rppg/synth.hpp"
#include "test_util.hpp"

using namespace rppg;

TEST_SUITE("synth") {

TEST_CASE("splitmix64 reference value") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("clean signal: CHROM and POS recover 72 BPM") {
  SynthConfig c;
  c.height = c.width = 8;
  const auto trace = spatial_average(synth_video(c));
  CHECK(std::abs(waveform_hr(chrom_bvp(trace, c.fps).samples, c.fps).bpm - 72.0) <= 0.5);
  CHECK(std::abs(waveform_hr(pos_bvp(trace, c.fps).samples, c.fps).bpm - 72.0) <= 0.5);
}

TEST_CASE("no pulse: estimate stays in band") {
  SynthConfig c;
  c.pulse_amplitude = 0.0;
  c.noise_std = 0.01;
  c.height = c.width = 8;
  const auto trace = spatial_average(synth_video(c));
  const auto hr = waveform_hr(pos_bvp(trace, c.fps).samples, c.fps);
  CHECK(hr.bpm >= hr.band_low_bpm);
  CHECK(hr.bpm <= hr.band_high_bpm);
}

TEST_CASE("seeded determinism") {
  SynthConfig c;
  c.noise_std = 0.02;
  c.height = c.width = 6;
  c.duration_s = 8.0;
  c.seed = 77;
  CHECK(synth_video(c).data == synth_video(c).data);
  const auto a = synth_trace(c);
  const auto b = synth_trace(c);
  CHECK(a.trace.g == b.trace.g);
  auto other = c;
  other.seed = 78;
  CHECK(synth_video(c).data != synth_video(other).data);
}

TEST_CASE("noiseless frames average to the analytic trace") {
  SynthConfig c;
  c.height = 5;
  c.width = 7;
  c.illum_amplitude = 0.01;
  c.hr_start_bpm = 60.0;
  c.hr_end_bpm = 100.0;
  c.pulse_shape = PulseShape::kAsymmetric;
  const auto avg = spatial_average(synth_video(c));
  const auto truth = synth_trace(c);
  CHECK(truth.true_hr_bpm == doctest::Approx(80.0));
  for (std::size_t k = 0; k < avg.size(); ++k) {
    CHECK(std::abs(avg.r[k] - truth.trace.r[k]) < 1e-9);
    CHECK(std::abs(avg.g[k] - truth.trace.g[k]) < 1e-9);
    CHECK(std::abs(avg.b[k] - truth.trace.b[k]) < 1e-9);
  }
  double peak = 0.0;
  for (double v : truth.ground_truth_ppg) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 1.0 + 1e-12);
  CHECK(peak > 0.99);
}

TEST_CASE("pixel noise averages down") {
  SynthConfig c;
  c.noise_std = 0.05;
  c.duration_s = 8.0;
  const auto avg = spatial_average(synth_video(c));
  const auto truth = synth_trace(c);
  const double bound = 3.0 * 0.05 / 64.0;
  std::size_t over = 0;
  for (std::size_t k = 0; k < avg.size(); ++k) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      if (std::abs(avg.channel(ch)[k] - truth.trace.channel(ch)[k]) >= bound) ++over;
    }
  }
  // 3-sigma: about 0.3% of samples may exceed.
  CHECK(over <= avg.size() * 3 / 100);

  const auto frames = synth_video(c);
  double sum = 0.0, sq = 0.0;
  const std::size_t count = 64 * 64;
  for (std::size_t p = 0; p < count; ++p) {
    const double e = frames.data[3 * p + 1] - truth.trace.g[0];
    sum += e;
    sq += e * e;
  }
  const double sd = std::sqrt(sq / count - (sum / count) * (sum / count));
  CHECK(sd == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("config validation") {
  auto rejects = [](const SynthConfig& c) {
    try {
      validate(c);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kConfigInvalid;
    }
    return false;
  };
  SynthConfig c;
  CHECK_NOTHROW(validate(c));
  c.hr_start_bpm = 40.0;
  CHECK(rejects(c));
  c = {};
  c.hr_end_bpm = 151.0;
  CHECK(rejects(c));
  c = {};
  c.fps = 10.0;
  CHECK(rejects(c));
  c = {};
  c.duration_s = 5.0;
  CHECK(rejects(c));
  c = {};
  c.illum_freq_hz = 0.5;
  CHECK(rejects(c));
  c = {};
  c.illum_amplitude = 0.8;  // 0.6 * 1.8 > 1
  CHECK(rejects(c));
  c = {};
  c.pulse_signature = {0.0, -1.0, 0.0};
  CHECK(rejects(c));
}

TEST_CASE("written recording loads back") {
  test::TempDir tmp("synth_rec");
  SynthConfig c;
  c.height = c.width = 4;
  c.duration_s = 10.0;
  const auto m = write_synthetic_recording(c, "r1", tmp.path / "r1");
  const auto rec = load_recording(read_manifest(tmp.path / "r1" / "manifest.json"));
  CHECK(rec.frames.n == 300);
  CHECK(rec.labels.samples.size() == 300);
  CHECK(m.dataset_kind == DatasetKind::kSynthetic);
  const auto avg = spatial_average(rec.frames);
  const auto truth = synth_trace(c);
  for (std::size_t k = 0; k < avg.size(); ++k) CHECK(avg.g[k] == static_cast<double>(static_cast<float>(truth.trace.g[k])));
}

}  // TEST_SUITE
