#include "rppg/jade.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rppg/error.hpp"

namespace rppg {

namespace {

// Cumulant matrices Q(e_i e_j') of whitened data z, scaled as in JADE so that
// the joint-diagonality criterion weights every pair equally.
std::vector<Eigen::Matrix3d> cumulant_matrices(const Matrix3X& z) {
  const double inv_t = 1.0 / static_cast<double>(z.cols());
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  std::vector<Eigen::Matrix3d> cm;
  cm.reserve(6);
  for (int i = 0; i < 3; ++i) {
    const Eigen::RowVectorXd zi = z.row(i);
    {
      const Eigen::RowVectorXd w = zi.array().square();
      Eigen::Matrix3d q = (z.array().rowwise() * w.array()).matrix() * z.transpose() * inv_t;
      q -= id;
      q(i, i) -= 2.0;
      cm.push_back(q);
    }
    for (int j = 0; j < i; ++j) {
      const Eigen::RowVectorXd w = zi.array() * z.row(j).array();
      Eigen::Matrix3d q = (z.array().rowwise() * w.array()).matrix() * z.transpose() * inv_t;
      q(i, j) -= 1.0;
      q(j, i) -= 1.0;
      cm.push_back(std::sqrt(2.0) * q);
    }
  }
  return cm;
}

}  // namespace

JadeResult jade_separate(const Matrix3X& x_in, const JadeOptions& options) {
  const Eigen::Index t = x_in.cols();
  if (t < 10) fail(ErrorCode::kTooShort, "jade_separate needs at least 10 samples");

  Matrix3X x = x_in;
  x.colwise() -= x.rowwise().mean();

  const Eigen::Matrix3d cov = x * x.transpose() / static_cast<double>(t);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d lambda = eig.eigenvalues();
  if (!(lambda(2) > 0.0) || lambda(0) < options.rank_tolerance * lambda(2)) {
    fail(ErrorCode::kRankDeficient, "covariance eigenvalue ratio below tolerance");
  }
  const Eigen::Matrix3d whitening = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Matrix3X z = whitening * x;

  auto cm = cumulant_matrices(z);
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();

  int sweep = 0;
  bool rotating = true;
  while (rotating) {
    if (sweep == options.max_sweeps) {
      fail(ErrorCode::kConvergenceFailure, "joint diagonalization did not converge in " +
                                               std::to_string(options.max_sweeps) + " sweeps");
    }
    ++sweep;
    rotating = false;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double gpp = 0.0, gqq = 0.0, gpq = 0.0;
        for (const auto& m : cm) {
          const double g0 = m(p, p) - m(q, q);
          const double g1 = m(p, q) + m(q, p);
          gpp += g0 * g0;
          gqq += g1 * g1;
          gpq += g0 * g1;
        }
        const double ton = gpp - gqq;
        const double toff = 2.0 * gpq;
        const double theta = 0.5 * std::atan2(toff, ton + std::sqrt(ton * ton + toff * toff));
        if (std::abs(theta) <= options.angle_threshold) continue;
        rotating = true;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        Eigen::Matrix2d g;
        g << c, -s, s, c;
        const std::array<int, 2> idx = {p, q};
        Eigen::Matrix<double, 3, 2> vc;
        vc << v.col(p), v.col(q);
        vc = vc * g;
        v.col(p) = vc.col(0);
        v.col(q) = vc.col(1);
        for (auto& m : cm) {
          Eigen::Matrix<double, 2, 3> rows;
          rows << m.row(idx[0]), m.row(idx[1]);
          rows = g.transpose() * rows;
          m.row(p) = rows.row(0);
          m.row(q) = rows.row(1);
          Eigen::Matrix<double, 3, 2> cols;
          cols << m.col(p), m.col(q);
          cols = cols * g;
          m.col(p) = cols.col(0);
          m.col(q) = cols.col(1);
        }
      }
    }
  }

  Eigen::Matrix3d b = v.transpose() * whitening;
  // Order by energy of the corresponding mixing columns, largest first.
  const Eigen::Matrix3d mixing = b.inverse();
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int c) { return mixing.col(a).squaredNorm() > mixing.col(c).squaredNorm(); });
  Eigen::Matrix3d sorted;
  for (int i = 0; i < 3; ++i) {
    sorted.row(i) = b.row(order[static_cast<std::size_t>(i)]);
    if (sorted(i, 0) < 0.0) sorted.row(i) *= -1.0;
  }

  JadeResult result;
  result.demixing = sorted;
  result.sources = sorted * x;
  result.sweeps = sweep;
  return result;
}

}  // namespace rppg
