#include "rppg/dsp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <shared_mutex>
#include <tuple>

#include <Eigen/Sparse>
#include <fftw3.h>

#include "rppg/error.hpp"

namespace rppg {

using cplx = std::complex<double>;

std::complex<double> BiquadCascade::response(double freq_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / design.fs;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sections) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

std::vector<std::complex<double>> BiquadCascade::poles() const {
  std::vector<cplx> out;
  for (const auto& s : sections) {
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

BiquadCascade design_bandpass(const BandpassDesign& d) {
  if (d.order < 1 || !(d.fs > 0.0) || !(d.low_hz > 0.0) || !(d.low_hz < d.high_hz) || !(d.high_hz < d.fs / 2.0)) {
    fail(ErrorCode::kInvalidBand, "need order >= 1 and 0 < low < high < fs/2");
  }
  const double pi = std::numbers::pi;
  const double k = 2.0 * d.fs;
  const double w1 = k * std::tan(pi * d.low_hz / d.fs);
  const double w2 = k * std::tan(pi * d.high_hz / d.fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<cplx> upper;
  std::vector<double> real;
  for (int i = 1; i <= d.order; ++i) {
    const cplx p = std::polar(1.0, pi * (2.0 * i + d.order - 1.0) / (2.0 * d.order));
    const cplx pb = p * bw;
    const cplx disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
    for (const cplx s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
      const cplx z = (k + s) / (k - s);
      if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
        real.push_back(z.real());
      } else if (z.imag() > 0.0) {
        upper.push_back(z);
      }
    }
  }
  std::sort(real.begin(), real.end());

  BiquadCascade cascade;
  cascade.design = d;
  // Every section gets one zero at z = 1 and one at z = -1.
  for (const cplx z : upper) cascade.sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    cascade.sections.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }

  const double center_hz = d.fs / pi * std::atan(w0 / k);
  const double gain = 1.0 / std::abs(cascade.response(center_hz));
  const double per_section = std::pow(gain, 1.0 / static_cast<double>(cascade.sections.size()));
  for (auto& s : cascade.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
  return cascade;
}

const BiquadCascade& cached_bandpass(const BandpassDesign& d) {
  using Key = std::tuple<int, double, double, double>;
  static std::shared_mutex mutex;
  static std::map<Key, BiquadCascade> cache;
  const Key key{d.order, d.low_hz, d.high_hz, d.fs};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  BiquadCascade designed = design_bandpass(d);
  std::unique_lock lock(mutex);
  return cache.try_emplace(key, std::move(designed)).first->second;
}

namespace {

struct SectionState {
  double s1 = 0.0;
  double s2 = 0.0;
};

void run_cascade(const BiquadCascade& f, std::vector<double>& x, std::vector<SectionState> state) {
  for (std::size_t k = 0; k < f.sections.size(); ++k) {
    const Biquad& s = f.sections[k];
    double s1 = state[k].s1;
    double s2 = state[k].s2;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

// Section states that make a constant unit input a fixed point of the cascade.
std::vector<SectionState> steady_state(const BiquadCascade& f) {
  std::vector<SectionState> zi(f.sections.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < f.sections.size(); ++k) {
    const Biquad& s = f.sections[k];
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    zi[k].s2 = scale * (s.b2 - s.a2 * dc);
    zi[k].s1 = scale * (s.b1 - s.a1 * dc) + zi[k].s2;
    scale *= dc;
  }
  return zi;
}

std::vector<SectionState> scaled(std::vector<SectionState> zi, double v) {
  for (auto& s : zi) {
    s.s1 *= v;
    s.s2 *= v;
  }
  return zi;
}

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> sosfilt(const BiquadCascade& filter, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(filter, y, std::vector<SectionState>(filter.sections.size()));
  return y;
}

std::vector<double> filtfilt(const BiquadCascade& filter, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t pad = 3 * static_cast<std::size_t>(filter.transfer_order());
  if (n <= pad) fail(ErrorCode::kTooShort, "filtfilt needs more than " + std::to_string(pad) + " samples");

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = steady_state(filter);
  run_cascade(filter, ext, scaled(zi, ext.front()));
  std::reverse(ext.begin(), ext.end());
  run_cascade(filter, ext, scaled(zi, ext.front()));
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::vector<double> detrend(std::span<const double> x, double lambda) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 3) fail(ErrorCode::kTooShort, "detrend needs at least 3 samples");

  // D2' D2 is pentadiagonal; assemble it row by row from the (1, -2, 1) stencil.
  const double l2 = lambda * lambda;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n));
  for (Eigen::Index r = 0; r + 2 < n; ++r) {
    const Eigen::Index idx[3] = {r, r + 1, r + 2};
    const double coef[3] = {1.0, -2.0, 1.0};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(idx[i], idx[j], l2 * coef[i] * coef[j]);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kDegenerateInput, "detrend factorization failed");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  const Eigen::VectorXd trend = solver.solve(xv);
  std::vector<double> y(x.size());
  for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - trend[i];
  return y;
}

Spectrum periodogram(std::span<const double> x, double fs, std::size_t pad_factor) {
  const std::size_t n = x.size();
  if (n < 8) fail(ErrorCode::kTooShort, "periodogram needs at least 8 samples");
  if (pad_factor < 1) fail(ErrorCode::kConfigInvalid, "pad_factor must be >= 1");

  Spectrum spec;
  spec.fs = fs;
  spec.nfft = std::bit_ceil(pad_factor * n);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);

  const std::size_t bins = spec.nfft / 2 + 1;
  double* in = fftw_alloc_real(spec.nfft);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(spec.nfft), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < spec.nfft; ++i) in[i] = i < n ? x[i] - mean : 0.0;
  fftw_execute(plan);

  spec.freqs.resize(bins);
  spec.power.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    spec.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(spec.nfft);
    spec.power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return spec;
}

HrEstimate estimate_hr(std::span<const double> x, double fs, const HrBand& band, std::size_t pad_factor) {
  if (static_cast<double>(x.size()) < 8.0 * fs) {
    fail(ErrorCode::kTooShort, "heart rate estimation needs at least 8 s of signal");
  }
  const Spectrum spec = periodogram(x, fs, pad_factor);
  std::size_t best = spec.freqs.size();
  for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
    if (spec.freqs[k] < band.low_hz || spec.freqs[k] > band.high_hz) continue;
    if (best == spec.freqs.size() || spec.power[k] > spec.power[best]) best = k;
  }
  if (best == spec.freqs.size()) fail(ErrorCode::kEmptyBand, "no spectral bin inside the heart-rate band");
  HrEstimate hr;
  hr.bpm = 60.0 * spec.freqs[best];
  hr.band_low_bpm = 60.0 * band.low_hz;
  hr.band_high_bpm = 60.0 * band.high_hz;
  return hr;
}

std::vector<double> postprocess(std::span<const double> x, double fs, const PostprocessConfig& config) {
  const BiquadCascade& filter = cached_bandpass({config.filter_order, config.low_hz, config.high_hz, fs});
  if (!config.detrend_enabled) return filtfilt(filter, x);
  const auto detrended = detrend(x, config.detrend_lambda);
  return filtfilt(filter, detrended);
}

HrEstimate waveform_hr(std::span<const double> x, double fs, const PostprocessConfig& config) {
  const auto filtered = postprocess(x, fs, config);
  return estimate_hr(filtered, fs, {config.low_hz, config.high_hz}, config.pad_factor);
}

}  // namespace rppg
