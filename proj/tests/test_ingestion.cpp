#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"
#include "rppg/synth.hpp"
#include "test_util.hpp"

using namespace rppg;
using rppg::test::TempDir;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected rppg::Error");
  return ErrorCode::kUsage;
}

FrameSequence random_frames(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  FrameSequence f;
  f.n = n;
  f.height = h;
  f.width = w;
  f.fps = 30.0;
  f.data.resize(n * f.frame_stride());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (double& v : f.data) v = u(rng);
  return f;
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("synthetic manifest round-trips to the generated arrays") {
  TempDir tmp("ing_synth");
  SynthConfig c;
  c.duration_s = 8.0;
  c.fps = 15.0;
  c.height = 6;
  c.width = 5;
  c.noise_std = 0.01;
  c.seed = 11;
  write_synthetic_recording(c, "rt", tmp.path / "rt");
  const auto manifest = read_manifest(tmp.path / "rt" / "manifest.json");
  CHECK(manifest.id == "rt");
  CHECK(manifest.dataset_kind == DatasetKind::kSynthetic);
  const Recording rec = load_recording(manifest);
  const FrameSequence expected = synth_video(c);
  REQUIRE(rec.frames.n == expected.n);
  CHECK(rec.frames.height == 6);
  CHECK(rec.frames.width == 5);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < expected.data.size(); ++i) {
    if (rec.frames.data[i] != static_cast<double>(static_cast<float>(expected.data[i]))) ++mismatches;
  }
  CHECK(mismatches == 0);
  CHECK(rec.labels.samples == synth_trace(c).ground_truth_ppg);
  CHECK(rec.labels.rate == 15.0);
}

TEST_CASE("manifest validation") {
  RecordingManifest m;
  m.id = "x";
  m.fps = 0.0;
  m.label_rate = 30.0;
  CHECK(code_of([&] { validate_manifest(m); }) == ErrorCode::kRateMismatch);
  m.fps = 30.0;
  m.roi = Roi{0, 0, 0, 4};
  CHECK(code_of([&] { validate_manifest(m); }) == ErrorCode::kEmptyRoi);
  CHECK(code_of([] { (void)read_manifest("/nonexistent/manifest.json"); }) == ErrorCode::kMissingPath);

  TempDir tmp("ing_manifest");
  std::ofstream(tmp.path / "m.json") << R"({"id":"a","frames_path":"f","labels_path":"l","fps":30,"label_rate":30,
    "dataset_kind":"generic","bogus":1})";
  CHECK(code_of([&] { (void)read_manifest(tmp.path / "m.json"); }) == ErrorCode::kInvalidManifest);
}

TEST_CASE("manifest write/read keeps fields and resolves relative paths") {
  TempDir tmp("ing_mrt");
  RecordingManifest m;
  m.id = "v01";
  m.frames_path = tmp.path / "v01" / "frames";
  m.labels_path = tmp.path / "v01" / "gt.csv";
  m.fps = 30.0;
  m.label_rate = 60.0;
  m.dataset_kind = DatasetKind::kScamps;
  m.roi = Roi{1, 2, 3, 4};
  write_manifest(m, tmp.path / "manifest.json");
  const auto raw = nlohmann::json::parse(std::ifstream(tmp.path / "manifest.json"));
  CHECK(raw.at("frames_path").get<std::string>() == "v01/frames");
  const auto back = read_manifest(tmp.path / "manifest.json");
  CHECK(back.id == "v01");
  CHECK(back.frames_path.lexically_normal() == m.frames_path.lexically_normal());
  CHECK(back.labels_path.lexically_normal() == m.labels_path.lexically_normal());
  CHECK(back.fps == 30.0);
  CHECK(back.label_rate == 60.0);
  CHECK(back.dataset_kind == DatasetKind::kScamps);
  REQUIRE(back.roi.has_value());
  CHECK(*back.roi == Roi{1, 2, 3, 4});
}

TEST_CASE("generic PNG directory with 64 frames and 64 labels") {
  TempDir tmp("ing_png");
  FrameSequence f;
  f.n = 64;
  f.height = 4;
  f.width = 3;
  f.fps = 30.0;
  f.data.resize(f.n * f.frame_stride());
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<double>(i % 256) / 255.0;
  fs::create_directories(tmp.path / "frames");
  for (std::size_t k = 0; k < f.n; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "%05zu.png", k);
    write_png_frame(f, k, tmp.path / "frames" / name);
  }
  std::vector<double> labels(64);
  for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = std::sin(0.1 * static_cast<double>(k));
  write_label_csv(labels, tmp.path / "labels.csv");

  RecordingManifest m;
  m.id = "png";
  m.frames_path = tmp.path / "frames";
  m.labels_path = tmp.path / "labels.csv";
  m.fps = 30.0;
  m.label_rate = 30.0;
  const Recording rec = load_recording(m);
  CHECK(rec.frames.n == 64);
  CHECK(rec.labels.samples.size() == 64);
  CHECK(rec.frames.data == f.data);  // k/255 survives 8-bit quantization exactly
  CHECK(rec.labels.samples == labels);
}

TEST_CASE("corrupt inputs are reported by kind") {
  TempDir tmp("ing_corrupt");
  std::ofstream(tmp.path / "bad.png") << "not a png";
  CHECK(code_of([&] { (void)read_png_directory(tmp.path, 30.0); }) == ErrorCode::kCorruptFrame);

  FrameSequence f = random_frames(3, 2, 2, 1);
  write_frames_bin(f, tmp.path / "frames.bin");
  auto bytes = [&] {
    std::ifstream in(tmp.path / "frames.bin", std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
  }();
  std::ofstream(tmp.path / "short.bin", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));
  CHECK(code_of([&] { (void)read_frames_bin(tmp.path / "short.bin", 30.0); }) == ErrorCode::kTruncatedFile);
  bytes[0] = 'X';
  std::ofstream(tmp.path / "magic.bin", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  CHECK(code_of([&] { (void)read_frames_bin(tmp.path / "magic.bin", 30.0); }) == ErrorCode::kBadMagic);

  std::ofstream(tmp.path / "labels.csv") << "ppg\n0.1\nabc\n";
  CHECK(code_of([&] { (void)read_label_csv(tmp.path / "labels.csv"); }) == ErrorCode::kLabelParseError);
}

TEST_CASE("UBFC and PURE label formats") {
  TempDir tmp("ing_ds");
  write_frames_bin(random_frames(40, 2, 2, 3), tmp.path / "frames.bin");

  std::ofstream(tmp.path / "ground_truth.txt") << "0.1 0.2 0.3 0.4\n70 70 70 70\n0 0.03 0.06 0.1\n";
  RecordingManifest m;
  m.id = "u";
  m.frames_path = tmp.path / "frames.bin";
  m.labels_path = tmp.path / "ground_truth.txt";
  m.fps = 30.0;
  m.label_rate = 30.0;
  m.dataset_kind = DatasetKind::kUbfc;
  CHECK(load_recording(m).labels.samples == std::vector<double>{0.1, 0.2, 0.3, 0.4});

  std::ofstream(tmp.path / "gt.xmp") << "0,70,98,0.5\n33,70,98,0.25\n";
  m.labels_path = tmp.path / "gt.xmp";
  CHECK(load_recording(m).labels.samples == std::vector<double>{0.5, 0.25});

  nlohmann::json pure;
  for (int i = 0; i < 4; ++i) pure["/FullPackage"].push_back({{"Timestamp", i}, {"Value", {{"waveform", 10 * i}}}});
  for (int i = 0; i < 40; ++i) pure["/Image"].push_back({{"Timestamp", static_cast<double>(i) * 1e9 / 30.0}});
  std::ofstream(tmp.path / "pure.json") << pure.dump();
  m.dataset_kind = DatasetKind::kPure;
  m.labels_path = tmp.path / "pure.json";
  CHECK(load_recording(m).labels.samples == std::vector<double>{0, 10, 20, 30});
  m.fps = 20.0;
  CHECK(code_of([&] { (void)load_recording(m); }) == ErrorCode::kRateMismatch);
}

TEST_CASE("align_labels") {
  const std::vector<double> s = {0.0, 1.0, 4.0, 9.0, 16.0};
  const auto same = align_labels({s, 30.0}, 30.0, 4);
  CHECK(same == std::vector<double>(s.begin(), s.begin() + 4));

  const auto up = align_labels({{0.0, 1.0}, 1.0}, 2.0, 3);
  REQUIRE(up.size() == 3);
  CHECK(up[0] == doctest::Approx(0.0));
  CHECK(up[1] == doctest::Approx(0.5));
  CHECK(up[2] == doctest::Approx(1.0));

  const auto hi = test::tone(1.5, 60.0, 1200);
  const auto down = align_labels({hi, 60.0}, 30.0, 600);
  double dev = 0.0;
  for (std::size_t k = 0; k < down.size(); ++k) {
    dev = std::max(dev, std::abs(down[k] - std::sin(2.0 * test::kPi * 1.5 * static_cast<double>(k) / 30.0)));
  }
  CHECK(dev < 1e-3);

  // 0.5 s of labels for a 1 s video.
  CHECK(code_of([] { (void)align_labels({std::vector<double>(15, 0.0), 30.0}, 30.0, 30); }) ==
        ErrorCode::kInsufficientCoverage);
}

TEST_CASE("spatial_average") {
  FrameSequence f;
  f.n = 1;
  f.height = 2;
  f.width = 2;
  f.fps = 30.0;
  f.data = {0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1, 0.2, 0.3};
  auto t = spatial_average(f);
  CHECK(t.r[0] == doctest::Approx(0.1));
  CHECK(t.g[0] == doctest::Approx(0.2));
  CHECK(t.b[0] == doctest::Approx(0.3));

  f.data = {0, 0, 0, 0, 0, 0, 0.2, 0.4, 0.6, 0.2, 0.4, 0.6};  // top row dark
  t = spatial_average(f);
  CHECK(t.r[0] == doctest::Approx(0.1));
  CHECK(t.g[0] == doctest::Approx(0.2));
  CHECK(t.b[0] == doctest::Approx(0.3));

  t = spatial_average(f, Roi{0, 1, 2, 1});
  CHECK(t.r[0] == doctest::Approx(0.2));
  CHECK(t.g[0] == doctest::Approx(0.4));
  CHECK(t.b[0] == doctest::Approx(0.6));
  CHECK(code_of([&] { (void)spatial_average(f, Roi{0, 0, 0, 1}); }) == ErrorCode::kEmptyRoi);
}

TEST_CASE("diff_normalize") {
  CHECK(diff_normalize(std::vector<double>{0.5, 0.5, 0.5}) == std::vector<double>{0, 0, 0});
  const auto d = diff_normalize(std::vector<double>{1.0, 3.0});
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == 0.0);
  const auto z = diff_normalize(std::vector<double>{0.0, 0.0, 1.0, 2.0});
  CHECK(z[0] == 0.0);
  for (double v : z) CHECK(std::isfinite(v));
}

TEST_CASE("standardize") {
  const auto s = standardize(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(s[0] == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK(standardize(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});

  std::vector<double> x = {3.0, -1.0, 7.5, 2.25, 0.0, 4.0};
  const auto once = standardize(x);
  const auto twice = standardize(once);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
}

TEST_CASE("make_chunks drops the remainder") {
  CHECK(make_chunks(random_frames(450, 2, 2, 5), 180).size() == 2);
  CHECK(make_chunks(random_frames(180, 2, 2, 5), 180).size() == 1);
  CHECK(make_chunks(random_frames(100, 2, 2, 5), 180).empty());
  CHECK(chunk_labels(std::vector<double>(450, 1.0), 180).size() == 2);
}

TEST_CASE("chunk channels are per-pixel diff and standardized series") {
  const FrameSequence f = random_frames(20, 3, 2, 9);
  const auto chunks = make_chunks(f, 10, "v");
  REQUIRE(chunks.size() == 2);
  const auto& c = chunks[1];
  CHECK(c.source_id == "v");
  CHECK(c.chunk_index == 1);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    std::vector<double> series(10);
    for (std::size_t t = 0; t < 10; ++t) series[t] = f.at(10 + t, 2, 1, ch);
    // Oracle: ratio differences normalized by their population std.
    std::vector<double> d(10, 0.0);
    for (std::size_t t = 0; t + 1 < 10; ++t) d[t] = (series[t + 1] - series[t]) / (series[t + 1] + series[t]);
    const double mu = test::mean(d);
    double var = 0.0;
    for (double v : d) var += (v - mu) * (v - mu);
    const double sd = std::sqrt(var / 10.0);
    const double smu = test::mean(series);
    double svar = 0.0;
    for (double v : series) svar += (v - smu) * (v - smu);
    const double ssd = std::sqrt(svar / 10.0);
    for (std::size_t t = 0; t < 10; ++t) {
      CHECK(c.data[c.index(t, 2, 1, ch)] == doctest::Approx(d[t] / sd).epsilon(1e-5));
      CHECK(c.data[c.index(t, 2, 1, 3 + ch)] == doctest::Approx((series[t] - smu) / ssd).epsilon(1e-5));
    }
  }
}

TEST_CASE("chunk cache round trip, sizes and corruption") {
  TempDir tmp("ing_cache");
  const fs::path dir = tmp.path / "vid";
  const FrameSequence f = random_frames(360, 8, 8, 21);
  const auto chunks = make_chunks(f, 180, "vid");
  std::vector<double> aligned(360);
  for (std::size_t k = 0; k < aligned.size(); ++k) aligned[k] = std::cos(0.05 * static_cast<double>(k));
  const auto labels = chunk_labels(aligned, 180);
  const auto files = write_chunk_cache(chunks, labels, dir);
  REQUIRE(files.size() == 2);
  for (const auto& file : files) {
    CHECK(fs::file_size(file.chunk_file) == 24 + 180 * 8 * 8 * 6 * 4);
    CHECK(fs::file_size(file.labels_file) == 12 + 180 * 4);
  }
  const ChunkCache back = read_chunk_cache(dir);
  CHECK(back.chunks == chunks);
  CHECK(back.labels == labels);

  auto bytes = [&] {
    std::ifstream in(files[0].chunk_file, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
  }();
  bytes[1] = 'Z';
  std::ofstream(files[0].chunk_file, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  CHECK(code_of([&] { (void)read_chunk_file(files[0].chunk_file); }) == ErrorCode::kBadMagic);
  bytes[1] = 'P';
  std::ofstream(files[0].chunk_file, std::ios::binary).write(bytes.data(), 1000);
  CHECK(code_of([&] { (void)read_chunk_file(files[0].chunk_file); }) == ErrorCode::kTruncatedFile);
  bytes[4] = 7;  // version
  std::ofstream(files[0].chunk_file, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  CHECK(code_of([&] { (void)read_chunk_file(files[0].chunk_file); }) == ErrorCode::kVersionMismatch);
}

}  // TEST_SUITE
