#include "nested/ellipsoid.hpp"

#include <cmath>
#include <stdexcept>

#include "nested/rng.hpp"
#include "nested/special.hpp"

namespace nested {

Ellipsoid::Ellipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape, double enlargement)
    : center_(std::move(center)), shape_(std::move(shape)), enlargement_(enlargement) {
  if (shape_.rows() != shape_.cols() || shape_.rows() != center_.size()) {
    throw std::invalid_argument("Ellipsoid: shape/center size mismatch");
  }
  if (!(enlargement_ >= 1.0)) {
    throw std::invalid_argument("Ellipsoid: enlargement must be >= 1");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(shape_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("Ellipsoid: shape is not positive-definite");
  }
  cholesky_ = llt.matrixL();
}

double Ellipsoid::mahalanobis_sq(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = cholesky_.triangularView<Eigen::Lower>().solve(x - center_);
  return z.squaredNorm();
}

bool Ellipsoid::contains(const Eigen::VectorXd& x) const {
  return mahalanobis_sq(x) <= 1.0;
}

double Ellipsoid::log_volume() const {
  double log_det_chol = 0.0;
  for (int i = 0; i < cholesky_.rows(); ++i) log_det_chol += std::log(cholesky_(i, i));
  return log_unit_ball_volume(dimension()) + log_det_chol;
}

Eigen::VectorXd Ellipsoid::sample(RngStream& rng) const {
  const int d = dimension();
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  const double norm = z.norm();
  if (norm == 0.0) return center_;
  const double radius = std::pow(rng.uniform_open(), 1.0 / d);
  z *= radius / norm;
  return center_ + cholesky_ * z;
}

Ellipsoid fit_ellipsoid(const Eigen::MatrixXd& points, double enlargement,
                        bool* degenerate) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (n < d + 1) {
    throw std::invalid_argument("fit_ellipsoid: need at least d+1 points");
  }
  if (!(enlargement >= 1.0)) {
    throw std::invalid_argument("fit_ellipsoid: enlargement must be >= 1");
  }

  const Eigen::VectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  bool jittered = false;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || cov.trace() <= 0.0) {
    const double jitter = 1e-12 * std::max(cov.trace(), 1.0);
    cov += jitter * Eigen::MatrixXd::Identity(d, d);
    jittered = true;
    llt.compute(cov);
    while (llt.info() != Eigen::Success) {
      cov += std::max(1e-12, 10.0 * cov.diagonal().maxCoeff() * 1e-12) *
             Eigen::MatrixXd::Identity(d, d);
      llt.compute(cov);
    }
  }
  if (degenerate != nullptr) *degenerate = jittered;

  // Scale so the farthest input point sits on the boundary, then inflate
  // by `enlargement` in volume; the tiny margin keeps containment exact
  // in floating point.
  const Eigen::MatrixXd chol_lower = llt.matrixL();
  double max_m2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = chol_lower.triangularView<Eigen::Lower>().solve(
        (points.row(i).transpose() - mean).eval());
    max_m2 = std::max(max_m2, z.squaredNorm());
  }
  if (max_m2 <= 0.0) max_m2 = 1e-12;
  const double scale = max_m2 * (1.0 + 1e-9) * std::pow(enlargement, 2.0 / d);
  return Ellipsoid(mean, scale * cov, enlargement);
}

EllipsoidUnion::EllipsoidUnion(std::vector<Ellipsoid> ellipsoids)
    : ellipsoids_(std::move(ellipsoids)) {
  if (ellipsoids_.empty()) throw std::invalid_argument("EllipsoidUnion: empty");
  double total = 0.0;
  std::vector<double> volumes;
  volumes.reserve(ellipsoids_.size());
  for (const auto& e : ellipsoids_) {
    volumes.push_back(std::exp(e.log_volume()));
    total += volumes.back();
  }
  cumulative_.resize(volumes.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    acc += volumes[i] / total;
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;
}

bool EllipsoidUnion::contains(const Eigen::VectorXd& x) const {
  for (const auto& e : ellipsoids_) {
    if (e.contains(x)) return true;
  }
  return false;
}

Eigen::VectorXd EllipsoidUnion::sample(RngStream& rng) const {
  for (;;) {
    const double pick = rng.uniform();
    std::size_t idx = 0;
    while (idx + 1 < cumulative_.size() && cumulative_[idx] < pick) ++idx;
    Eigen::VectorXd x = ellipsoids_[idx].sample(rng);
    int overlap = 0;
    for (const auto& e : ellipsoids_) {
      if (e.contains(x)) ++overlap;
    }
    if (overlap <= 1 || rng.uniform() * overlap <= 1.0) return x;
  }
}

}  // namespace nested
