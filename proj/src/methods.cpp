#include "rppg/methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "rppg/error.hpp"
#include "rppg/ingestion.hpp"
#include "rppg/jade.hpp"

namespace rppg {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double std_pop(std::span<const double> x) {
  const double m = mean_of(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

BvpSignal make_signal(Method method, double fps, std::vector<double> samples, std::uint32_t flags = kBvpNone) {
  BvpSignal s;
  s.samples = std::move(samples);
  s.fps = fps;
  s.method = method;
  s.flags = flags;
  return s;
}

void require_consistent(const RgbTrace& trace) {
  if (trace.r.size() != trace.g.size() || trace.b.size() != trace.g.size()) {
    fail(ErrorCode::kDegenerateInput, "trace channels differ in length");
  }
}

// Each channel divided by its mean, minus `offset`.
Matrix3X ratio_normalized(const RgbTrace& trace, double offset) {
  const auto n = static_cast<Eigen::Index>(trace.size());
  Matrix3X m(3, n);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto ch = trace.channel(c);
    const double mu = mean_of(ch);
    if (mu == 0.0 || !std::isfinite(mu)) fail(ErrorCode::kDegenerateInput, "channel mean is zero");
    for (Eigen::Index k = 0; k < n; ++k) m(static_cast<Eigen::Index>(c), k) = ch[static_cast<std::size_t>(k)] / mu - offset;
  }
  return m;
}

std::vector<double> row_of(const Matrix3X& m, Eigen::Index row) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(k)] = m(row, k);
  return out;
}

}  // namespace

PbvSignature::PbvSignature(const std::array<double, 3>& v) {
  double norm = 0.0;
  for (double c : v) {
    if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorCode::kConfigInvalid, "PBV signature must be non-negative");
    norm += c * c;
  }
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) fail(ErrorCode::kConfigInvalid, "PBV signature must be nonzero");
  for (std::size_t i = 0; i < 3; ++i) v_[i] = v[i] / norm;
}

BvpSignal green_bvp(const RgbTrace& trace) {
  require_consistent(trace);
  if (trace.size() < 2) fail(ErrorCode::kTooShort, "green needs at least 2 samples");
  return make_signal(Method::kGreen, trace.fps, standardize(trace.g));
}

BvpSignal chrom_bvp(const RgbTrace& trace, double fs, const BandpassDesign& band) {
  require_consistent(trace);
  const std::size_t n = trace.size();
  if (static_cast<double>(n) < 3.0 * fs) fail(ErrorCode::kTooShort, "CHROM needs at least 3 s of samples");

  const Matrix3X cn = ratio_normalized(trace, 0.0);
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    x[k] = ChromConstants::kX[0] * cn(0, i) + ChromConstants::kX[1] * cn(1, i) + ChromConstants::kX[2] * cn(2, i);
    y[k] = ChromConstants::kY[0] * cn(0, i) + ChromConstants::kY[1] * cn(1, i) + ChromConstants::kY[2] * cn(2, i);
  }
  BandpassDesign d = band;
  d.fs = fs;
  const BiquadCascade& filter = cached_bandpass(d);
  const auto xf = filtfilt(filter, x);
  const auto yf = filtfilt(filter, y);

  const double sx = std_pop(xf);
  const double sy = std_pop(yf);
  if (!(sy > 0.0)) return make_signal(Method::kChrom, fs, std::vector<double>(n, 0.0), kBvpZeroDenominator);
  const double alpha = sx / sy;
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = xf[k] - alpha * yf[k];
  // X and Y carry identical luminance; a residual at rounding level means
  // the input had no chrominance content.
  if (std_pop(s) <= 1e-9 * (sx + alpha * sy)) {
    return make_signal(Method::kChrom, fs, std::vector<double>(n, 0.0), kBvpLuminanceOnly);
  }
  return make_signal(Method::kChrom, fs, standardize(s));
}

BvpSignal pos_bvp(const RgbTrace& trace, double fs) {
  require_consistent(trace);
  const std::size_t n = trace.size();
  const auto len = static_cast<std::size_t>(std::ceil(PosConstants::kWindowSeconds * fs));
  if (len > n || len < 2) fail(ErrorCode::kWindowTooLong, "POS window longer than the trace");

  const auto& proj = PosConstants::kProjection;
  std::vector<double> h_sum(n, 0.0);
  std::vector<double> s1(len), s2(len), cn(3 * len);
  for (std::size_t start = 0; start + len <= n; ++start) {
    double ac = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto ch = trace.channel(c).subspan(start, len);
      const double mu = mean_of(ch);
      if (mu == 0.0) fail(ErrorCode::kDegenerateInput, "window mean is zero");
      for (std::size_t k = 0; k < len; ++k) {
        cn[c * len + k] = ch[k] / mu;
        ac = std::max(ac, std::abs(cn[c * len + k] - 1.0));
      }
    }
    double peak = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      s1[k] = proj[0][0] * cn[k] + proj[0][1] * cn[len + k] + proj[0][2] * cn[2 * len + k];
      s2[k] = proj[1][0] * cn[k] + proj[1][1] * cn[len + k] + proj[1][2] * cn[2 * len + k];
      peak = std::max({peak, std::abs(s1[k]), std::abs(s2[k])});
    }
    // Projection of pure luminance is zero up to rounding.
    if (peak <= 1e-9 * ac) continue;
    const double sd1 = std_pop(s1);
    const double sd2 = std_pop(s2);
    const double ratio = sd2 > 0.0 ? sd1 / sd2 : 0.0;
    double hmean = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      s1[k] += ratio * s2[k];
      hmean += s1[k];
    }
    hmean /= static_cast<double>(len);
    for (std::size_t k = 0; k < len; ++k) h_sum[start + k] += s1[k] - hmean;
  }
  std::uint32_t flags = kBvpNone;
  if (std::all_of(h_sum.begin(), h_sum.end(), [](double v) { return v == 0.0; })) flags |= kBvpLuminanceOnly;
  return make_signal(Method::kPos, fs, standardize(h_sum), flags);
}

BvpSignal pbv_bvp(const RgbTrace& trace, const std::optional<PbvSignature>& signature) {
  require_consistent(trace);
  const std::size_t n = trace.size();
  if (n < 3) fail(ErrorCode::kTooShort, "PBV needs at least 3 samples");

  const Matrix3X cn = ratio_normalized(trace, 1.0);
  Eigen::Vector3d p;
  if (signature) {
    p = Eigen::Map<const Eigen::Vector3d>(signature->vector().data());
  } else {
    for (int c = 0; c < 3; ++c) p(c) = std_pop(row_of(cn, c));
    const double norm = p.norm();
    if (norm > 0.0) p /= norm;
  }

  Eigen::Matrix3d q = cn * cn.transpose();
  const double tr = q.trace();
  if (!(tr > 0.0) || !(p.norm() > 0.0)) {
    return make_signal(Method::kPbv, trace.fps, std::vector<double>(n, 0.0), kBvpRidgeRegularized);
  }
  std::uint32_t flags = kBvpNone;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(q, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(2);
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    q.diagonal().array() += 1e-9 * tr / 3.0;
    flags |= kBvpRidgeRegularized;
  }
  const Eigen::Vector3d w = q.ldlt().solve(p);
  const Eigen::RowVectorXd out = w.transpose() * cn;
  std::vector<double> samples(out.data(), out.data() + out.size());
  return make_signal(Method::kPbv, trace.fps, standardize(samples), flags);
}

LgiProjection lgi_project(const Matrix3X& m) {
  const Eigen::JacobiSVD<Matrix3X> svd(m, Eigen::ComputeThinU);
  LgiProjection out;
  out.u = svd.matrixU().col(0);
  out.projector = Eigen::Matrix3d::Identity() - out.u * out.u.transpose();
  out.projected = out.projector * m;
  return out;
}

BvpSignal lgi_bvp(const RgbTrace& trace) {
  require_consistent(trace);
  const std::size_t n = trace.size();
  if (n < 3) fail(ErrorCode::kTooShort, "LGI needs at least 3 samples");
  // Ratio-normalized but not centered: the dominant direction is the common
  // intensity axis, which carries illumination and motion.
  const Matrix3X cn = ratio_normalized(trace, 0.0);
  const LgiProjection proj = lgi_project(cn);
  const std::vector<double> row = row_of(proj.projected, 1);
  if (rms(row) <= 1e-12 * std::sqrt(cn.squaredNorm() / static_cast<double>(n))) {
    return make_signal(Method::kLgi, trace.fps, std::vector<double>(n, 0.0));
  }
  return make_signal(Method::kLgi, trace.fps, standardize(row));
}

BvpSignal ica_bvp(const RgbTrace& trace, double fs, const HrBand& band) {
  require_consistent(trace);
  const std::size_t n = trace.size();
  if (static_cast<double>(n) < 5.0 * fs) fail(ErrorCode::kTooShort, "ICA needs at least 5 s of samples");

  Matrix3X x(3, static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < 3; ++c) {
    const auto z = standardize(trace.channel(c));
    for (std::size_t k = 0; k < n; ++k) x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = z[k];
  }

  JadeResult jade;
  try {
    jade = jade_separate(x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRankDeficient) throw;
    BvpSignal fallback = green_bvp(trace);
    fallback.method = Method::kIca;
    fallback.flags |= kBvpRankDeficient;
    return fallback;
  }

  int best = 0;
  double best_peak = -1.0;
  for (int i = 0; i < 3; ++i) {
    const Spectrum spec = periodogram(row_of(jade.sources, i), fs);
    double peak = 0.0;
    for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
      if (spec.freqs[k] >= band.low_hz && spec.freqs[k] <= band.high_hz) peak = std::max(peak, spec.power[k]);
    }
    if (peak > best_peak) {
      best_peak = peak;
      best = i;
    }
  }
  std::vector<double> out = standardize(row_of(jade.sources, best));
  const auto g = standardize(trace.g);
  double corr = 0.0;
  for (std::size_t k = 0; k < n; ++k) corr += out[k] * g[k];
  if (corr < 0.0) {
    for (double& v : out) v = -v;
  }
  return make_signal(Method::kIca, fs, std::move(out));
}

BvpSignal run_method(Method method, const RgbTrace& trace, const MethodOptions& options) {
  const double fs = trace.fps;
  switch (method) {
    case Method::kGreen: return green_bvp(trace);
    case Method::kIca: return ica_bvp(trace, fs, options.ica_band);
    case Method::kChrom: return chrom_bvp(trace, fs, options.chrom_band);
    case Method::kPos: return pos_bvp(trace, fs);
    case Method::kPbv: return pbv_bvp(trace, options.pbv_signature);
    case Method::kLgi: return lgi_bvp(trace);
  }
  fail(ErrorCode::kConfigInvalid, "unknown method");
}

}  // namespace rppg
