#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "selfcorr/error.hpp"

namespace selfcorr {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A finite point cloud in R^d stored one point per row. An empty dataset
/// still remembers its dimension (an n x d matrix with n = 0).
template <typename Scalar>
class BasicDataset {
 public:
  using Index = Eigen::Index;
  using Points = PointMatrix<Scalar>;

  explicit BasicDataset(Index dim = 1) : points_(0, dim) {
    if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dataset dimension must be >= 1");
  }

  explicit BasicDataset(Points points) : points_(std::move(points)) {
    if (points_.cols() < 1) throw Error(ErrorKind::InvalidArgument, "dataset dimension must be >= 1");
    if (!points_.allFinite()) throw Error(ErrorKind::InvalidArgument, "dataset contains non-finite coordinates");
  }

  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  bool empty() const noexcept { return points_.rows() == 0; }

  auto point(Index i) const { return points_.row(i); }
  const Points& points() const noexcept { return points_; }

  /// Stacks `other` below this dataset.
  BasicDataset concat(const BasicDataset& other) const {
    if (other.dim() != dim()) {
      throw Error(ErrorKind::DimensionMismatch, "cannot concatenate datasets of dimension " +
                                                    std::to_string(dim()) + " and " +
                                                    std::to_string(other.dim()));
    }
    Points out(size() + other.size(), dim());
    out.topRows(size()) = points_;
    out.bottomRows(other.size()) = other.points_;
    return BasicDataset(std::move(out));
  }

  friend bool operator==(const BasicDataset& a, const BasicDataset& b) {
    return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() &&
           a.points_ == b.points_;
  }

 private:
  Points points_;
};

using Dataset = BasicDataset<double>;
using Point = VectorX<double>;

}  // namespace selfcorr
