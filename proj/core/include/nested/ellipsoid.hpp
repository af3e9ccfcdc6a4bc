#pragma once

#include <Eigen/Dense>
#include <vector>

namespace nested {

class RngStream;

/// A bounding ellipsoid { x : (x - center)' shape^{-1} (x - center) <= 1 }.
/// shape is symmetric positive-definite; its Cholesky factor is kept for
/// sampling and volume evaluation.
class Ellipsoid {
 public:
  Ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape, double enlargement);

  int dimension() const { return static_cast<int>(center_.size()); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  double enlargement() const { return enlargement_; }

  bool contains(const Eigen::VectorXd& x) const;
  double mahalanobis_sq(const Eigen::VectorXd& x) const;

  double log_volume() const;

  /// Uniform draw from the ellipsoid interior.
  Eigen::VectorXd sample(RngStream& rng) const;

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
  Eigen::MatrixXd cholesky_;  // lower factor of shape
  double enlargement_;
};

/// Fits the mean/covariance ellipsoid of the rows of `points`, scaled so
/// every input point is contained, then inflated by `enlargement` in
/// volume. A degenerate covariance is regularized with diagonal jitter
/// 1e-12 * trace; `degenerate` reports whether that path was taken.
Ellipsoid fit_ellipsoid(const Eigen::MatrixXd& points, double enlargement,
                        bool* degenerate = nullptr);

/// Uniform sampling over a union of ellipsoids: pick a member with
/// probability proportional to its volume, draw inside it, keep the draw
/// with probability 1/(number of members containing it). The kept points
/// have flat density on the union.
class EllipsoidUnion {
 public:
  explicit EllipsoidUnion(std::vector<Ellipsoid> ellipsoids);

  const std::vector<Ellipsoid>& ellipsoids() const { return ellipsoids_; }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(RngStream& rng) const;

 private:
  std::vector<Ellipsoid> ellipsoids_;
  std::vector<double> cumulative_;
};

}  // namespace nested
