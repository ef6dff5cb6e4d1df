#pragma once

// Multivariate Gaussian model family: exact maximum-likelihood fitting,
// sampling and density evaluation, plus the flat parameter-vector layout
// that every parameter-space distance is measured in.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "selfcorr/dataset.hpp"
#include "selfcorr/error.hpp"

namespace selfcorr {

inline constexpr double kDefaultCovFloor = 1e-9;

template <typename Scalar>
class Gaussian {
 public:
  using Index = Eigen::Index;
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  Gaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) { validate(); }

  static Gaussian standard(Index dim) { return Gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim)); }

  Index dim() const noexcept { return mean_.size(); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }

  bool has_diagonal_cov() const { return (cov_ - Matrix(cov_.diagonal().asDiagonal())).isZero(0); }

  friend bool operator==(const Gaussian& a, const Gaussian& b) {
    return a.dim() == b.dim() && a.mean_ == b.mean_ && a.cov_ == b.cov_;
  }

 private:
  void validate() const {
    if (mean_.size() < 1) throw Error(ErrorKind::InvalidArgument, "gaussian dimension must be >= 1");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "covariance must be " + std::to_string(mean_.size()) +
                                                    "x" + std::to_string(mean_.size()));
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "gaussian parameters must be finite");
    }
    const Scalar scale = std::max<Scalar>(Scalar(1), cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
      throw Error(ErrorKind::InvalidArgument, "covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::EigFailure, "covariance eigendecomposition failed");
    // Allow round-off sized negatives on PSD matrices.
    if (eig.eigenvalues().minCoeff() < -Scalar(1e-12) * scale) {
      throw Error(ErrorKind::InvalidArgument, "covariance has negative eigenvalues");
    }
  }

  Vector mean_;
  Matrix cov_;
};

using GaussianParams = Gaussian<double>;

namespace detail {

template <typename Scalar>
Eigen::LLT<MatrixX<Scalar>> cholesky(const MatrixX<Scalar>& cov) {
  Eigen::LLT<MatrixX<Scalar>> llt(cov);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().array() > Scalar(0)).all()) {
    throw Error(ErrorKind::CholeskyFailure, "covariance is not positive definite");
  }
  return llt;
}

}  // namespace detail

/// Maximum-likelihood fit: sample mean and divisor-n covariance, plus
/// `cov_floor * I` added unconditionally.
template <typename Scalar>
Gaussian<Scalar> fit_gaussian(const BasicDataset<Scalar>& data, Scalar cov_floor = Scalar(kDefaultCovFloor)) {
  if (data.size() < 2) {
    throw Error(ErrorKind::EmptyOrSingleton,
                "fit needs at least 2 points, got " + std::to_string(data.size()));
  }
  if (!(cov_floor >= Scalar(0))) throw Error(ErrorKind::InvalidArgument, "cov_floor must be nonnegative");
  const auto n = static_cast<Scalar>(data.size());
  const auto& x = data.points();
  VectorX<Scalar> mean = x.colwise().sum().transpose() / n;
  const PointMatrix<Scalar> centered = x.rowwise() - mean.transpose();
  MatrixX<Scalar> cov = (centered.transpose() * centered) / n;
  cov = Scalar(0.5) * (cov + cov.transpose()).eval();
  cov.diagonal().array() += cov_floor;
  return Gaussian<Scalar>(std::move(mean), std::move(cov));
}

/// Draws `m` i.i.d. points as mean + L z, z standard normal, L the Cholesky
/// factor of cov + cov_floor I. Normals are consumed point by point, so two
/// calls with equal streams and dimension share their noise.
template <typename Scalar, typename Urbg>
BasicDataset<Scalar> sample_gaussian(const Gaussian<Scalar>& params, Eigen::Index m, Urbg& rng,
                                     Scalar cov_floor = Scalar(0)) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
  MatrixX<Scalar> cov = params.cov();
  cov.diagonal().array() += cov_floor;
  const MatrixX<Scalar> lower = detail::cholesky(cov).matrixL();
  const Eigen::Index d = params.dim();
  std::normal_distribution<Scalar> normal;
  PointMatrix<Scalar> z(m, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z(i, k) = normal(rng);
  }
  PointMatrix<Scalar> out = z * lower.transpose();
  out.rowwise() += params.mean().transpose();
  return BasicDataset<Scalar>(std::move(out));
}

/// Cached factorization for repeated density evaluation.
template <typename Scalar>
class GaussianDensity {
 public:
  explicit GaussianDensity(const Gaussian<Scalar>& params)
      : mean_(params.mean()), llt_(detail::cholesky(params.cov())) {
    const MatrixX<Scalar> lower = llt_.matrixL();
    const Scalar log_det = Scalar(2) * lower.diagonal().array().log().sum();
    log_norm_ = Scalar(-0.5) * (static_cast<Scalar>(mean_.size()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) + log_det);
  }

  template <typename Derived>
  Scalar log_pdf(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != mean_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                                    ", model has " + std::to_string(mean_.size()));
    }
    VectorX<Scalar> diff(mean_.size());
    for (Eigen::Index k = 0; k < diff.size(); ++k) diff(k) = x(k) - mean_(k);
    const VectorX<Scalar> white = llt_.matrixL().solve(diff);
    return log_norm_ - Scalar(0.5) * white.squaredNorm();
  }

  template <typename Derived>
  Scalar pdf(const Eigen::MatrixBase<Derived>& x) const {
    return std::exp(log_pdf(x));
  }

 private:
  VectorX<Scalar> mean_;
  Eigen::LLT<MatrixX<Scalar>> llt_;
  Scalar log_norm_{};
};

template <typename Scalar, typename Derived>
Scalar log_pdf(const Gaussian<Scalar>& params, const Eigen::MatrixBase<Derived>& x) {
  return GaussianDensity<Scalar>(params).log_pdf(x);
}

template <typename Scalar, typename Derived>
Scalar pdf(const Gaussian<Scalar>& params, const Eigen::MatrixBase<Derived>& x) {
  return GaussianDensity<Scalar>(params).pdf(x);
}

/// Flat layout: d mean entries, then the full covariance row-major (d + d^2).
template <typename Scalar>
VectorX<Scalar> to_param_vector(const Gaussian<Scalar>& params) {
  const Eigen::Index d = params.dim();
  VectorX<Scalar> out(d + d * d);
  out.head(d) = params.mean();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = params.cov();
  out.tail(d * d) = row_major.template reshaped<Eigen::RowMajor>();
  return out;
}

template <typename Scalar>
Gaussian<Scalar> from_param_vector(const VectorX<Scalar>& entries, Eigen::Index dim) {
  if (dim < 1 || entries.size() != dim + dim * dim) {
    throw Error(ErrorKind::DimensionMismatch, "parameter vector of length " + std::to_string(entries.size()) +
                                                  " does not match dimension " + std::to_string(dim));
  }
  MatrixX<Scalar> cov = entries.tail(dim * dim).template reshaped<Eigen::RowMajor>(dim, dim);
  return Gaussian<Scalar>(entries.head(dim), std::move(cov));
}

}  // namespace selfcorr
