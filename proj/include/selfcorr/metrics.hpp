#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "selfcorr/assignment.hpp"
#include "selfcorr/dataset.hpp"
#include "selfcorr/gaussian.hpp"

namespace selfcorr {

/// Principal square root of a symmetric PSD matrix; eigenvalues clamped at 0.
template <typename Scalar>
MatrixX<Scalar> sqrtm_psd(const MatrixX<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(m);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::EigFailure, "symmetric eigendecomposition failed");
  const VectorX<Scalar> root = eig.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Closed-form Wasserstein-2 distance between two Gaussians.
///
/// The covariance (Bures) term tr(Sp + Sq - 2 (Sp^1/2 Sq Sp^1/2)^1/2) is
/// evaluated as ||A - B U||_F^2 with A = Sp^1/2, B = Sq^1/2 and U the
/// orthogonal polar factor aligning B to A. This is algebraically identical
/// and cannot go negative, so p == q gives an exact-order zero instead of the
/// sqrt(round-off) a trace difference leaves behind.
template <typename Scalar>
Scalar gaussian_w2(const Gaussian<Scalar>& p, const Gaussian<Scalar>& q) {
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "W2 between dimensions " + std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
  }
  const MatrixX<Scalar> a = sqrtm_psd(p.cov());
  const MatrixX<Scalar> b = sqrtm_psd(q.cov());
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(b * a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixX<Scalar> align = svd.matrixU() * svd.matrixV().transpose();
  const Scalar bures_sq = (a - b * align).squaredNorm();
  return std::sqrt((p.mean() - q.mean()).squaredNorm() + bures_sq);
}

/// Euclidean norm of the difference of the flattened parameter vectors.
template <typename Scalar>
Scalar param_distance(const Gaussian<Scalar>& p, const Gaussian<Scalar>& q) {
  if (p.dim() != q.dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "parameter distance between dimensions " + std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
  }
  return (to_param_vector(p) - to_param_vector(q)).norm();
}

/// W2 between two equal-size point clouds under the best permutation coupling.
template <typename Scalar>
Scalar empirical_w2(const BasicDataset<Scalar>& a, const BasicDataset<Scalar>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::SizeMismatch,
                "empirical W2 needs equal sizes, got " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "empirical W2 needs equal dimensions");
  if (a.empty()) throw Error(ErrorKind::EmptyInput, "empirical W2 of empty datasets");
  const auto& pa = a.points();
  const auto& pb = b.points();
  const Assignment best = solve_assignment(a.size(), [&](Eigen::Index i, Eigen::Index j) {
    return static_cast<double>((pa.row(i) - pb.row(j)).squaredNorm());
  });
  return static_cast<Scalar>(std::sqrt(best.cost / static_cast<double>(a.size())));
}

}  // namespace selfcorr
