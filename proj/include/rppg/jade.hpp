#pragma once

#include <Eigen/Core>

namespace rppg {

using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

struct JadeOptions {
  double angle_threshold = 1e-8;
  int max_sweeps = 100;
  double rank_tolerance = 1e-12;
};

struct JadeResult {
  Matrix3X sources;
  Eigen::Matrix3d demixing;
  int sweeps = 0;
};

/// JADE for three channels: whitening by eigendecomposition of the sample
/// covariance, six fourth-order cumulant matrices, joint diagonalization by
/// Jacobi rotations. Rows are centered before whitening. Demixing rows are
/// ordered by decreasing mixing-column energy with the sign convention that
/// each row's first entry is non-negative.
///
/// Throws kRankDeficient when a covariance eigenvalue falls below
/// rank_tolerance times the largest, and kConvergenceFailure after
/// max_sweeps sweeps that still rotate.
JadeResult jade_separate(const Matrix3X& x, const JadeOptions& options = {});

}  // namespace rppg
