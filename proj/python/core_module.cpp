#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rppg/dsp.hpp"
#include "rppg/error.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/ingestion.hpp"
#include "rppg/jade.hpp"
#include "rppg/methods.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/synth.hpp"

namespace py = pybind11;
using namespace rppg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

// (N, 3) array <-> RgbTrace.
RgbTrace to_trace(const Array& rgb, double fps) {
  if (rgb.ndim() != 2 || rgb.shape(1) != 3) throw py::value_error("expected an (N, 3) array");
  const auto n = static_cast<std::size_t>(rgb.shape(0));
  RgbTrace t;
  t.fps = fps;
  t.r.resize(n);
  t.g.resize(n);
  t.b.resize(n);
  const double* p = rgb.data();
  for (std::size_t k = 0; k < n; ++k) {
    t.r[k] = p[3 * k];
    t.g[k] = p[3 * k + 1];
    t.b[k] = p[3 * k + 2];
  }
  return t;
}

Array from_trace(const RgbTrace& t) {
  Array out({static_cast<py::ssize_t>(t.size()), py::ssize_t{3}});
  double* p = out.mutable_data();
  for (std::size_t k = 0; k < t.size(); ++k) {
    p[3 * k] = t.r[k];
    p[3 * k + 1] = t.g[k];
    p[3 * k + 2] = t.b[k];
  }
  return out;
}

FrameSequence to_frames(const Array& a, double fps) {
  if (a.ndim() != 4 || a.shape(3) != 3) throw py::value_error("expected an (N, H, W, 3) array");
  FrameSequence f;
  f.n = static_cast<std::size_t>(a.shape(0));
  f.height = static_cast<std::size_t>(a.shape(1));
  f.width = static_cast<std::size_t>(a.shape(2));
  f.fps = fps;
  f.data.assign(a.data(), a.data() + a.size());
  return f;
}

Array from_frames(const FrameSequence& f) {
  Array out({static_cast<py::ssize_t>(f.n), static_cast<py::ssize_t>(f.height), static_cast<py::ssize_t>(f.width),
             py::ssize_t{3}});
  std::copy(f.data.begin(), f.data.end(), out.mutable_data());
  return out;
}

PostprocessConfig post_config(int order, double low, double high, bool detrend_enabled, double lambda,
                              std::size_t pad) {
  PostprocessConfig c;
  c.filter_order = order;
  c.low_hz = low;
  c.high_hz = high;
  c.detrend_enabled = detrend_enabled;
  c.detrend_lambda = lambda;
  c.pad_factor = pad;
  return c;
}

RunConfig run_config(const std::vector<std::string>& manifests, const std::vector<std::string>& methods,
                     const std::filesystem::path& output, std::string_view chunk_mode, std::size_t chunk_len,
                     std::size_t jobs, const std::optional<std::array<double, 3>>& pbv_signature) {
  RunConfig c;
  c.manifests = manifests;
  for (const auto& m : methods) c.methods.push_back(parse_method(m));
  c.output_dir = output;
  c.chunk_mode = parse_chunk_mode(chunk_mode);
  c.chunk_len = chunk_len;
  c.jobs = jobs;
  c.pbv_signature = pbv_signature;
  return c;
}

py::list exclusions_of(const std::vector<Exclusion>& ex) {
  py::list out;
  for (const auto& e : ex) out.append(py::make_tuple(e.video_id, e.stage, e.error));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of rppg_toolbox";

  static py::exception<Error> error(m, "RppgError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object instance = exc(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  py::list methods;
  for (Method x : kAllMethods) methods.append(std::string(to_string(x)));
  m.attr("METHODS") = py::tuple(methods);

  // DSP
  m.def(
      "design_bandpass",
      [](int order, double low, double high, double fs) {
        const auto f = design_bandpass({order, low, high, fs});
        Array sos({static_cast<py::ssize_t>(f.sections.size()), py::ssize_t{6}});
        double* p = sos.mutable_data();
        for (const auto& s : f.sections) {
          *p++ = s.b0;
          *p++ = s.b1;
          *p++ = s.b2;
          *p++ = 1.0;
          *p++ = s.a1;
          *p++ = s.a2;
        }
        return sos;
      },
      py::arg("order") = 2, py::arg("low_hz") = 0.75, py::arg("high_hz") = 2.5, py::arg("fs") = 30.0,
      "Butterworth bandpass as second-order sections, rows (b0, b1, b2, 1, a1, a2).");
  m.def(
      "filtfilt",
      [](const Array& x, double fs, int order, double low, double high) {
        return to_array(filtfilt(cached_bandpass({order, low, high, fs}), to_vector(x)));
      },
      py::arg("x"), py::arg("fs"), py::arg("order") = 2, py::arg("low_hz") = 0.75, py::arg("high_hz") = 2.5);
  m.def(
      "detrend", [](const Array& x, double lambda) { return to_array(detrend(to_vector(x), lambda)); }, py::arg("x"),
      py::arg("lam") = kDefaultDetrendLambda);
  m.def(
      "periodogram",
      [](const Array& x, double fs, std::size_t pad) {
        const auto s = periodogram(to_vector(x), fs, pad);
        return py::make_tuple(to_array(s.freqs), to_array(s.power));
      },
      py::arg("x"), py::arg("fs"), py::arg("pad_factor") = kDefaultPadFactor);
  m.def(
      "estimate_hr",
      [](const Array& x, double fs, double low, double high, std::size_t pad) {
        return estimate_hr(to_vector(x), fs, {low, high}, pad).bpm;
      },
      py::arg("x"), py::arg("fs"), py::arg("low_hz") = 0.75, py::arg("high_hz") = 2.5,
      py::arg("pad_factor") = kDefaultPadFactor, "Periodogram argmax inside the band, in BPM.");
  m.def(
      "waveform_hr",
      [](const Array& x, double fs, int order, double low, double high, bool detrend_enabled, double lambda,
         std::size_t pad) {
        return waveform_hr(to_vector(x), fs, post_config(order, low, high, detrend_enabled, lambda, pad)).bpm;
      },
      py::arg("x"), py::arg("fs"), py::arg("order") = 2, py::arg("low_hz") = 0.75, py::arg("high_hz") = 2.5,
      py::arg("detrend") = true, py::arg("lam") = kDefaultDetrendLambda, py::arg("pad_factor") = kDefaultPadFactor,
      "Detrend, zero-phase bandpass, then HR in BPM.");

  // Methods
  m.def(
      "run_method",
      [](const std::string& name, const Array& rgb, double fs, std::optional<std::array<double, 3>> signature) {
        MethodOptions opt;
        if (signature) opt.pbv_signature = PbvSignature(*signature);
        return to_array(run_method(parse_method(name), to_trace(rgb, fs), opt).samples);
      },
      py::arg("method"), py::arg("rgb"), py::arg("fs"), py::arg("pbv_signature") = py::none(),
      "BVP estimate from an (N, 3) RGB trace.");
  m.def(
      "spatial_average",
      [](const Array& frames, std::optional<std::array<int, 4>> roi) {
        std::optional<Roi> r;
        if (roi) r = Roi{(*roi)[0], (*roi)[1], (*roi)[2], (*roi)[3]};
        return from_trace(spatial_average(to_frames(frames, 1.0), r));
      },
      py::arg("frames"), py::arg("roi") = py::none(), "roi is (x, y, w, h).");
  m.def(
      "jade",
      [](const Array& x) {
        if (x.ndim() != 2 || x.shape(0) != 3) throw py::value_error("expected a (3, N) array");
        const Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic, Eigen::RowMajor>> in(x.data(), 3, x.shape(1));
        const JadeResult r = jade_separate(in);
        Array sources({py::ssize_t{3}, static_cast<py::ssize_t>(r.sources.cols())});
        Eigen::Map<Eigen::Matrix<double, 3, Eigen::Dynamic, Eigen::RowMajor>>(sources.mutable_data(), 3,
                                                                              r.sources.cols()) = r.sources;
        Array demixing({py::ssize_t{3}, py::ssize_t{3}});
        Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(demixing.mutable_data()) = r.demixing;
        return py::make_tuple(sources, demixing);
      },
      py::arg("x"), "Returns (sources, demixing) for a (3, N) mixture.");

  // Metrics
  m.def(
      "compute_metrics",
      [](const Array& pred, const Array& label) {
        const auto p = to_vector(pred), l = to_vector(label);
        if (p.size() != l.size()) throw py::value_error("pred and label differ in length");
        std::vector<VideoResult> rs;
        for (std::size_t i = 0; i < p.size(); ++i) rs.push_back({std::to_string(i), Method::kGreen, p[i], l[i]});
        const auto r = compute_metrics(rs);
        py::dict d;
        d["n_videos"] = r.n_videos;
        d["mae"] = r.mae;
        d["rmse"] = r.rmse;
        d["mape"] = r.mape;
        d["pearson"] = r.pearson;
        return d;
      },
      py::arg("pred"), py::arg("label"));

  // Synthetic data
  py::enum_<PulseShape>(m, "PulseShape").value("sine", PulseShape::kSine).value("asymmetric", PulseShape::kAsymmetric);
  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("seed", &SynthConfig::seed)
      .def_readwrite("duration_s", &SynthConfig::duration_s)
      .def_readwrite("fps", &SynthConfig::fps)
      .def_readwrite("hr_start_bpm", &SynthConfig::hr_start_bpm)
      .def_readwrite("hr_end_bpm", &SynthConfig::hr_end_bpm)
      .def_readwrite("pulse_shape", &SynthConfig::pulse_shape)
      .def_readwrite("pulse_signature", &SynthConfig::pulse_signature)
      .def_readwrite("pulse_amplitude", &SynthConfig::pulse_amplitude)
      .def_readwrite("baseline_rgb", &SynthConfig::baseline_rgb)
      .def_readwrite("illum_amplitude", &SynthConfig::illum_amplitude)
      .def_readwrite("illum_freq_hz", &SynthConfig::illum_freq_hz)
      .def_readwrite("noise_std", &SynthConfig::noise_std)
      .def_readwrite("height", &SynthConfig::height)
      .def_readwrite("width", &SynthConfig::width)
      .def_property_readonly("frame_count", &SynthConfig::frame_count)
      .def("validate", [](const SynthConfig& c) { validate(c); });
  m.def(
      "synth_trace",
      [](const SynthConfig& c) {
        const auto t = synth_trace(c);
        return py::make_tuple(from_trace(t.trace), to_array(t.ground_truth_ppg), t.true_hr_bpm);
      },
      py::arg("config"), "Returns (rgb (N, 3), ground-truth pulse, true HR in BPM).");
  m.def(
      "synth_video", [](const SynthConfig& c) { return from_frames(synth_video(c)); }, py::arg("config"));

  m.def(
      "load_recording",
      [](const std::filesystem::path& manifest) {
        const auto mf = read_manifest(manifest);
        const auto rec = load_recording(mf);
        py::dict d;
        d["id"] = mf.id;
        d["fps"] = mf.fps;
        d["frames"] = from_frames(rec.frames);
        d["labels"] = to_array(rec.labels.samples);
        d["label_rate"] = rec.labels.rate;
        return d;
      },
      py::arg("manifest"));

  // Pipeline commands
  m.def(
      "synth",
      [](const std::filesystem::path& batch, const std::filesystem::path& output, std::optional<std::uint64_t> seed,
         std::size_t jobs) { return cmd_synth(batch, output, seed, jobs).manifests; },
      py::arg("batch"), py::arg("output"), py::arg("seed") = py::none(), py::arg("jobs") = 0,
      "Writes one recording per batch entry; returns the manifest paths.");
  m.def(
      "preprocess",
      [](const std::vector<std::string>& manifests, const std::filesystem::path& output, std::size_t chunk_len,
         std::size_t jobs) {
        const auto o = cmd_preprocess(run_config(manifests, {"green"}, output, "video", chunk_len, jobs, std::nullopt));
        return py::make_tuple(o.exit_code, o.chunks, exclusions_of(o.exclusions));
      },
      py::arg("manifests"), py::arg("output"), py::arg("chunk_len") = kDefaultChunkLen, py::arg("jobs") = 0,
      "Returns (exit_code, chunk_count, exclusions).");
  m.def(
      "run",
      [](const std::vector<std::string>& manifests, const std::vector<std::string>& methods,
         const std::filesystem::path& output, const std::string& chunk_mode, std::size_t chunk_len, std::size_t jobs,
         std::optional<std::array<double, 3>> pbv_signature) {
        const auto o = cmd_run(run_config(manifests, methods, output, chunk_mode, chunk_len, jobs, pbv_signature));
        py::list rows;
        for (const auto& r : o.results) {
          rows.append(py::make_tuple(r.video_id, std::string(to_string(r.method)), r.hr_pred, r.hr_label));
        }
        return py::make_tuple(o.exit_code, rows, exclusions_of(o.exclusions));
      },
      py::arg("manifests"), py::arg("methods") = std::vector<std::string>{"green", "ica", "chrom", "pos", "pbv", "lgi"},
      py::arg("output") = "rppg_out", py::arg("chunk_mode") = "video", py::arg("chunk_len") = kDefaultChunkLen,
      py::arg("jobs") = 0, py::arg("pbv_signature") = py::none(),
      "Returns (exit_code, [(video_id, method, hr_pred, hr_label)], exclusions).");
  m.def(
      "evaluate",
      [](const std::filesystem::path& results, const std::filesystem::path& output) {
        return cmd_evaluate(results, output).markdown;
      },
      py::arg("results"), py::arg("output") = std::filesystem::path{}, "Returns the markdown report.");
}
