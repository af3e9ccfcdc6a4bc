#pragma once

#include <Eigen/Dense>
#include <vector>

namespace nested {

class RngStream;

struct Clustering {
  std::vector<int> assignment;     // per-point cluster label
  Eigen::MatrixXd centers;         // k x d
  int k = 1;
  double bic = 0.0;
};

/// k-means with k-means++ seeding, restarted `restarts` times; returns
/// the lowest-inertia run.
Clustering k_means(const Eigen::MatrixXd& points, int k, RngStream& rng,
                   int restarts = 10);

/// Chooses the cluster count in [1, max_clusters] by BIC under a
/// spherical-Gaussian mixture score (the x-means criterion). Clusters
/// smaller than min_cluster_size are rejected so each can support an
/// ellipsoid fit.
Clustering select_clusters_bic(const Eigen::MatrixXd& points, int max_clusters,
                               RngStream& rng, int min_cluster_size = 1);

}  // namespace nested
