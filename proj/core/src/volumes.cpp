#include <cmath>
#include <limits>
#include <stdexcept>

#include "nested/estimators.hpp"
#include "nested/rng.hpp"
#include "nested/special.hpp"

namespace nested {

std::string to_string(VolumeMethod method) {
  switch (method) {
    case VolumeMethod::mean_log: return "mean_log";
    case VolumeMethod::mean: return "mean";
    case VolumeMethod::walter: return "walter";
    case VolumeMethod::simulated: return "simulated";
  }
  return "unknown";
}

VolumeAssignment assign_volumes(const RunTrace& trace, VolumeMethod method,
                                std::uint64_t sim_seed) {
  VolumeAssignment out;
  out.method = method;
  out.sim_seed = sim_seed;
  out.log_x.reserve(trace.dead.size());

  double log_x = 0.0;  // running log volume, X0 = 1
  std::size_t i = 0;
  std::uint64_t group_index = 0;
  while (i < trace.dead.size()) {
    std::size_t j = i;
    while (j < trace.dead.size() && trace.dead[j].order == trace.dead[i].order) ++j;
    const std::int64_t q = static_cast<std::int64_t>(j - i);
    const std::int64_t n = trace.dead[i].n_active;
    if (n < q) throw std::invalid_argument("assign_volumes: n_active below group size");

    double log_t = 0.0;
    switch (method) {
      case VolumeMethod::mean_log:
        log_t = -harmonic_segment(n, q);
        break;
      case VolumeMethod::mean:
        if (q != 1) {
          throw std::invalid_argument(
              "assign_volumes: the mean estimator is defined for single deaths only");
        }
        log_t = std::log(static_cast<double>(n) / (n + 1));
        break;
      case VolumeMethod::walter:
        if (q != 1) {
          throw std::invalid_argument(
              "assign_volumes: the walter estimator is defined for single deaths only");
        }
        log_t = std::log1p(-1.0 / static_cast<double>(n));
        break;
      case VolumeMethod::simulated: {
        RngStream rng(sim_seed, group_index);
        log_t = std::log(rng.beta(static_cast<double>(n + 1 - q), static_cast<double>(q)));
        break;
      }
    }

    // Group members share one compression step, spaced equally in log X.
    for (std::int64_t k = 1; k <= q; ++k) {
      out.log_x.push_back(log_x + log_t * static_cast<double>(k) / static_cast<double>(q));
    }
    log_x += log_t;
    i = j;
    ++group_index;
  }

  out.log_x_end = trace.final_live.empty()
                      ? -std::numeric_limits<double>::infinity()
                      : log_x;
  return out;
}

}  // namespace nested
