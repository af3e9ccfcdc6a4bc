#include "nested/cluster.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nested/rng.hpp"

namespace nested {

namespace {

double inertia(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
               const std::vector<int>& assignment) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centers.row(assignment[i])).squaredNorm();
  }
  return total;
}

// One k-means run from a k-means++ seeding; returns final inertia.
double k_means_once(const Eigen::MatrixXd& points, int k, RngStream& rng,
                    Eigen::MatrixXd& centers, std::vector<int>& assignment) {
  const auto n = points.rows();
  centers.resize(k, points.cols());

  // k-means++ seeding.
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], (points.row(i) - centers.row(c - 1)).squaredNorm());
      total += dist2[i];
    }
    if (total <= 0.0) {
      centers.row(c) = points.row(static_cast<Eigen::Index>(rng.uniform_index(n)));
      continue;
    }
    double target = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= dist2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.row(c) = points.row(pick);
  }

  assignment.assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
        if (d2 < best_d) {
          best_d = d2;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[i]) += points.row(i);
      ++counts[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    if (!changed && iter > 0) break;
  }
  return inertia(points, centers, assignment);
}

// x-means style BIC of a k-cluster solution under a spherical Gaussian
// mixture with pooled maximum-likelihood variance.
double bic_score(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                 const std::vector<int>& assignment, int k) {
  const double n = static_cast<double>(points.rows());
  const double d = static_cast<double>(points.cols());
  std::vector<double> counts(k, 0.0);
  for (const int a : assignment) counts[a] += 1.0;

  double rss = inertia(points, centers, assignment);
  const double denom = d * std::max(n - k, 1.0);
  const double sigma2 = std::max(rss / denom, 1e-300);

  double log_lik = 0.0;
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0.0) log_lik += counts[c] * std::log(counts[c] / n);
  }
  log_lik += -0.5 * n * d * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * denom;

  const double params = k * (d + 1.0);
  return log_lik - 0.5 * params * std::log(n);
}

}  // namespace

Clustering k_means(const Eigen::MatrixXd& points, int k, RngStream& rng, int restarts) {
  if (k < 1 || points.rows() < k) {
    throw std::invalid_argument("k_means: need at least k points");
  }
  Clustering best;
  best.k = k;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd centers;
    std::vector<int> assignment;
    const double j = k_means_once(points, k, rng, centers, assignment);
    if (j < best_inertia) {
      best_inertia = j;
      best.centers = std::move(centers);
      best.assignment = std::move(assignment);
    }
  }
  best.bic = bic_score(points, best.centers, best.assignment, k);
  return best;
}

Clustering select_clusters_bic(const Eigen::MatrixXd& points, int max_clusters,
                               RngStream& rng, int min_cluster_size) {
  if (max_clusters < 1) throw std::invalid_argument("select_clusters_bic: max_clusters >= 1");
  Clustering best;
  bool have = false;
  for (int k = 1; k <= max_clusters && k <= points.rows(); ++k) {
    Clustering c = k_means(points, k, rng);
    std::vector<Eigen::Index> counts(k, 0);
    for (const int a : c.assignment) ++counts[a];
    bool viable = true;
    for (const auto cnt : counts) {
      if (cnt < min_cluster_size) viable = false;
    }
    if (!viable) continue;
    if (!have || c.bic > best.bic) {
      best = std::move(c);
      have = true;
    }
  }
  if (!have) {
    // Fall back to a single cluster; always viable when n >= min size.
    best = k_means(points, 1, rng);
  }
  return best;
}

}  // namespace nested
