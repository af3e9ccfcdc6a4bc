#include "nested/sampler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nested/cluster.hpp"
#include "nested/ellipsoid.hpp"

namespace nested {

namespace {

constexpr std::int64_t kMaxShrinkSteps = 100'000;

Eigen::MatrixXd live_u_matrix(const std::vector<Particle>& live) {
  if (live.empty()) throw std::invalid_argument("sampler: empty live set");
  const auto d = live.front().u.size();
  Eigen::MatrixXd m(live.size(), d);
  for (std::size_t i = 0; i < live.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = live[i].u[j];
  }
  return m;
}

bool inside_cube(std::span<const double> u) {
  for (const double v : u) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

Particle make_particle(const Problem& problem, std::vector<double> u,
                       LogValue log_like, LogValue threshold) {
  Particle p;
  p.theta = problem.prior().transform(u);
  p.u = std::move(u);
  p.log_like = log_like;
  p.birth_log_like = threshold;
  return p;
}

LogValue evaluate(const Problem& problem, std::span<const double> u,
                  SamplerStats& stats, std::vector<double>& theta_scratch) {
  theta_scratch.resize(u.size());
  problem.prior().transform(u, theta_scratch);
  ++stats.likelihood_calls;
  return problem.log_like(theta_scratch);
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::rejection: return "rejection";
    case SamplerKind::ellipsoid: return "ellipsoid";
    case SamplerKind::multi_ellipsoid: return "multi_ellipsoid";
    case SamplerKind::random_walk: return "random_walk";
    case SamplerKind::slice: return "slice";
  }
  return "unknown";
}

std::string SamplerConfig::description(int dimension) const {
  std::ostringstream out;
  out << to_string(kind);
  switch (kind) {
    case SamplerKind::rejection:
      break;
    case SamplerKind::ellipsoid:
      out << "(enlargement=" << enlargement << ")";
      break;
    case SamplerKind::multi_ellipsoid:
      out << "(enlargement=" << enlargement << ",max_clusters=" << max_clusters << ")";
      break;
    case SamplerKind::random_walk:
      out << "(steps=" << (steps > 0 ? steps : default_step_count(dimension))
          << ",target_accept=" << target_accept << ")";
      break;
    case SamplerKind::slice:
      out << "(steps=" << (steps > 0 ? steps : default_step_count(dimension)) << ")";
      break;
  }
  return out.str();
}

SamplerStats& SamplerStats::operator+=(const SamplerStats& o) {
  proposals += o.proposals;
  accepts += o.accepts;
  likelihood_calls += o.likelihood_calls;
  stale_walks += o.stale_walks;
  degenerate_fits += o.degenerate_fits;
  return *this;
}

SamplerExhausted::SamplerExhausted(double threshold, std::int64_t budget)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "sampler exhausted: no point with log L > " << threshold
            << " within " << budget << " likelihood calls";
        return msg.str();
      }()),
      threshold_log_like(threshold) {}

int default_step_count(int dimension) {
  if (dimension < 1) throw std::domain_error("default_step_count: dimension >= 1");
  return 5 * dimension;
}

double tune_step_scale(const SamplerStats& stats, double target_accept, double current) {
  if (stats.proposals <= 0) throw std::domain_error("tune_step_scale: no proposals");
  constexpr double kDamping = 10.0;
  return current * std::exp((stats.accept_rate() - target_accept) / kDamping);
}

SampleResult sample_rejection(const Problem& problem, LogValue threshold,
                              RngStream& rng, std::int64_t call_budget) {
  const int d = problem.dimension();
  SamplerStats stats;
  std::vector<double> u(d);
  std::vector<double> theta;
  while (stats.likelihood_calls < call_budget) {
    for (int i = 0; i < d; ++i) u[i] = rng.uniform();
    ++stats.proposals;
    const LogValue log_l = evaluate(problem, u, stats, theta);
    if (log_l > threshold) {
      ++stats.accepts;
      return {make_particle(problem, u, log_l, threshold), stats};
    }
  }
  throw SamplerExhausted(threshold.log(), call_budget);
}

namespace {

class RejectionSampler final : public ConstrainedSampler {
 public:
  explicit RejectionSampler(std::int64_t budget) : budget_(budget) {}
  SampleResult draw(const Problem& problem, LogValue threshold,
                    RngStream& rng) const override {
    return sample_rejection(problem, threshold, rng, budget_);
  }

 private:
  std::int64_t budget_;
};

class EllipsoidSampler final : public ConstrainedSampler {
 public:
  EllipsoidSampler(const std::vector<Particle>& live, const SamplerConfig& config)
      : config_(config),
        ellipsoid_(fit_ellipsoid(live_u_matrix(live), config.enlargement, &degenerate_)) {
    if (degenerate_) ++fit_stats_.degenerate_fits;
  }

  SampleResult draw(const Problem& problem, LogValue threshold,
                    RngStream& rng) const override {
    SamplerStats stats;
    std::vector<double> u(problem.dimension());
    std::vector<double> theta;
    while (stats.likelihood_calls < config_.call_budget) {
      const Eigen::VectorXd x = ellipsoid_.sample(rng);
      ++stats.proposals;
      Eigen::VectorXd::Map(u.data(), x.size()) = x;
      if (!inside_cube(u)) continue;
      const LogValue log_l = evaluate(problem, u, stats, theta);
      if (log_l > threshold) {
        ++stats.accepts;
        return {make_particle(problem, u, log_l, threshold), stats};
      }
    }
    throw SamplerExhausted(threshold.log(), config_.call_budget);
  }

  const Ellipsoid& ellipsoid() const { return ellipsoid_; }

 private:
  SamplerConfig config_;
  bool degenerate_ = false;
  Ellipsoid ellipsoid_;
};

class MultiEllipsoidSampler final : public ConstrainedSampler {
 public:
  MultiEllipsoidSampler(const std::vector<Particle>& live, const SamplerConfig& config,
                        RngStream& fit_rng)
      : config_(config), union_(fit_union(live, config, fit_rng, fit_stats_)) {}

  SampleResult draw(const Problem& problem, LogValue threshold,
                    RngStream& rng) const override {
    SamplerStats stats;
    std::vector<double> u(problem.dimension());
    std::vector<double> theta;
    while (stats.likelihood_calls < config_.call_budget) {
      const Eigen::VectorXd x = union_.sample(rng);
      ++stats.proposals;
      Eigen::VectorXd::Map(u.data(), x.size()) = x;
      if (!inside_cube(u)) continue;
      const LogValue log_l = evaluate(problem, u, stats, theta);
      if (log_l > threshold) {
        ++stats.accepts;
        return {make_particle(problem, u, log_l, threshold), stats};
      }
    }
    throw SamplerExhausted(threshold.log(), config_.call_budget);
  }

  const EllipsoidUnion& region() const { return union_; }

 private:
  static EllipsoidUnion fit_union(const std::vector<Particle>& live,
                                  const SamplerConfig& config, RngStream& fit_rng,
                                  SamplerStats& fit_stats) {
    const Eigen::MatrixXd points = live_u_matrix(live);
    const int d = static_cast<int>(points.cols());
    const Clustering clusters =
        select_clusters_bic(points, config.max_clusters, fit_rng, d + 1);

    std::vector<Ellipsoid> ellipsoids;
    for (int c = 0; c < clusters.k; ++c) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (clusters.assignment[i] == c) members.push_back(i);
      }
      if (members.empty()) continue;
      Eigen::MatrixXd sub(members.size(), d);
      for (std::size_t i = 0; i < members.size(); ++i) sub.row(i) = points.row(members[i]);
      bool degenerate = false;
      ellipsoids.push_back(fit_ellipsoid(sub, config.enlargement, &degenerate));
      if (degenerate) ++fit_stats.degenerate_fits;
    }
    return EllipsoidUnion(std::move(ellipsoids));
  }

  SamplerConfig config_;
  EllipsoidUnion union_;
};

void reflect_into_cube(std::vector<double>& u) {
  for (double& v : u) {
    while (v < 0.0 || v > 1.0) {
      if (v < 0.0) v = -v;
      if (v > 1.0) v = 2.0 - v;
    }
  }
}

class RandomWalkSampler final : public ConstrainedSampler {
 public:
  RandomWalkSampler(const std::vector<Particle>& live, const SamplerConfig& config,
                    double step_scale)
      : live_(&live), config_(config), step_scale_(step_scale) {
    if (live.empty()) throw std::invalid_argument("random walk: empty live set");
  }

  SampleResult draw(const Problem& problem, LogValue threshold,
                    RngStream& rng) const override {
    const int d = problem.dimension();
    const int steps = config_.steps > 0 ? config_.steps : default_step_count(d);
    SamplerStats stats;

    // Start from a random live point, never the dead point: restarting at
    // the removed contour would bias walks toward the lowest levels and
    // pin multi-modal runs to whichever mode is dying.
    const std::vector<Particle>& live = *live_;
    const Particle& start = live[rng.uniform_index(live.size())];
    std::vector<double> u = start.u;
    LogValue log_l = start.log_like;

    std::vector<double> candidate(d);
    std::vector<double> theta;
    for (int s = 0; s < steps; ++s) {
      for (int i = 0; i < d; ++i) candidate[i] = u[i] + step_scale_ * rng.normal();
      reflect_into_cube(candidate);
      ++stats.proposals;
      const LogValue log_l_new = evaluate(problem, candidate, stats, theta);
      if (log_l_new > threshold) {
        ++stats.accepts;
        u = candidate;
        log_l = log_l_new;
      }
    }
    if (stats.accepts == 0) ++stats.stale_walks;
    return {make_particle(problem, u, log_l, threshold), stats};
  }

 private:
  const std::vector<Particle>* live_;
  SamplerConfig config_;
  double step_scale_;
};

class SliceSampler final : public ConstrainedSampler {
 public:
  SliceSampler(const std::vector<Particle>& live, const SamplerConfig& config)
      : live_(&live), config_(config) {
    const Eigen::MatrixXd points = live_u_matrix(live);
    const int d = static_cast<int>(points.cols());
    if (points.rows() < d + 1) {
      throw std::invalid_argument("slice sampler: need at least d+1 live points");
    }
    const Eigen::VectorXd mean = points.colwise().mean();
    const Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(points.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("slice sampler: eigendecomposition failed");
    }
    axes_.resize(d, d);
    for (int k = 0; k < d; ++k) {
      const double len = 3.0 * std::sqrt(std::max(eig.eigenvalues()[k], 1e-16));
      axes_.col(k) = eig.eigenvectors().col(k) * len;
    }
  }

  SampleResult draw(const Problem& problem, LogValue threshold,
                    RngStream& rng) const override {
    const int d = problem.dimension();
    const int steps = config_.steps > 0 ? config_.steps : default_step_count(d);
    SamplerStats stats;

    const std::vector<Particle>& live = *live_;
    const Particle& start = live[rng.uniform_index(live.size())];
    std::vector<double> u = start.u;
    LogValue log_l = start.log_like;

    for (int s = 0; s < steps; ++s) {
      const Eigen::VectorXd dir = axes_.col(rng.uniform_index(d));
      slice_along(problem, threshold, dir, u, log_l, stats, rng);
      ++stats.proposals;
      ++stats.accepts;  // slice updates always land inside the contour
    }
    return {make_particle(problem, u, log_l, threshold), stats};
  }

 private:
  // One 1-D slice update along dir (Neal's stepping-out and shrinkage).
  // Bracket expansion beyond the hypercube clips to the bounds.
  void slice_along(const Problem& problem, LogValue threshold,
                   const Eigen::VectorXd& dir, std::vector<double>& u,
                   LogValue& log_l, SamplerStats& stats, RngStream& rng) const {
    const int d = static_cast<int>(u.size());
    std::vector<double> probe(d);
    std::vector<double> theta;

    const auto at = [&](double t) {
      for (int i = 0; i < d; ++i) probe[i] = u[i] + t * dir[i];
    };
    const auto in_slice = [&](double t) {
      at(t);
      if (!inside_cube(probe)) return false;
      return evaluate(problem, probe, stats, theta) > threshold;
    };

    double left = -rng.uniform();
    double right = left + 1.0;
    for (int e = 0; e < 1000 && in_slice(left); ++e) left -= 1.0;
    for (int e = 0; e < 1000 && in_slice(right); ++e) right += 1.0;

    for (std::int64_t shrink = 0; shrink < kMaxShrinkSteps; ++shrink) {
      const double t = rng.uniform(left, right);
      at(t);
      if (inside_cube(probe)) {
        const LogValue log_l_new = evaluate(problem, probe, stats, theta);
        if (log_l_new > threshold) {
          u = probe;
          log_l = log_l_new;
          return;
        }
      }
      if (t < 0.0) {
        left = t;
      } else {
        right = t;
      }
    }
    throw NumericalContourError("slice sampler: shrink limit hit, contour numerically flat");
  }

  const std::vector<Particle>* live_;
  SamplerConfig config_;
  Eigen::MatrixXd axes_;
};

}  // namespace

std::unique_ptr<ConstrainedSampler> prepare_sampler(const SamplerConfig& config,
                                                    const Problem& problem,
                                                    const std::vector<Particle>& live,
                                                    double step_scale,
                                                    RngStream& fit_rng) {
  switch (config.kind) {
    case SamplerKind::rejection:
      return std::make_unique<RejectionSampler>(config.call_budget);
    case SamplerKind::ellipsoid:
      return std::make_unique<EllipsoidSampler>(live, config);
    case SamplerKind::multi_ellipsoid:
      return std::make_unique<MultiEllipsoidSampler>(live, config, fit_rng);
    case SamplerKind::random_walk:
      return std::make_unique<RandomWalkSampler>(live, config, step_scale);
    case SamplerKind::slice:
      return std::make_unique<SliceSampler>(live, config);
  }
  throw std::logic_error("prepare_sampler: unknown kind");
}

namespace {

SampleResult one_shot(SamplerKind kind, const std::vector<Particle>& live,
                      LogValue threshold, const Problem& problem,
                      SamplerConfig config, RngStream& rng) {
  config.kind = kind;
  const auto sampler = prepare_sampler(config, problem, live, config.step_scale, rng);
  SampleResult result = sampler->draw(problem, threshold, rng);
  result.stats += sampler->fit_stats();
  return result;
}

}  // namespace

SampleResult sample_multi_ellipsoid(const std::vector<Particle>& live,
                                    LogValue threshold, const Problem& problem,
                                    const SamplerConfig& config, RngStream& rng) {
  return one_shot(SamplerKind::multi_ellipsoid, live, threshold, problem, config, rng);
}

SampleResult sample_random_walk(const std::vector<Particle>& live, LogValue threshold,
                                const Problem& problem, const SamplerConfig& config,
                                RngStream& rng) {
  return one_shot(SamplerKind::random_walk, live, threshold, problem, config, rng);
}

SampleResult sample_slice(const std::vector<Particle>& live, LogValue threshold,
                          const Problem& problem, const SamplerConfig& config,
                          RngStream& rng) {
  return one_shot(SamplerKind::slice, live, threshold, problem, config, rng);
}

}  // namespace nested
