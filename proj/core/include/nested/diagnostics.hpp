#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nested/estimators.hpp"
#include "nested/problem.hpp"
#include "nested/trace.hpp"

namespace nested {

enum class Verdict { pass, warn, fail };

std::string to_string(Verdict verdict);

/// Run-health summary. Verdict thresholds are fixed and recorded here:
/// fail below 1e-3, warn below 0.05 (on the smaller of the global
/// p-value and the Bonferroni-corrected rolling minimum).
struct DiagnosticReport {
  double insertion_p_global = 1.0;
  std::vector<double> insertion_p_rolling;
  double insertion_p_rolling_corrected = 1.0;  // Bonferroni over the blocks
  bool low_power = false;  // fewer than 10 * nlive recorded indexes

  struct VolumePoint {
    double log_like;
    double log_x_est;
    double log_x_true;
    double envelope;  // 5 sqrt(k) / n at iteration k
  };
  std::vector<VolumePoint> volume_deviations;
  double volume_violation_fraction = 0.0;

  Verdict verdict = Verdict::pass;
  double fail_below = 1e-3;
  double warn_below = 0.05;
};

/// Chi-squared test (32 equiprobable bins) of the pooled insertion
/// indexes against uniformity, each index normalized by its own
/// n_active, plus non-overlapping blocks of nlive indexes tested
/// individually and combined by Bonferroni. Under correct
/// constrained-prior sampling the indexes are uniform; extreme p-values
/// flag a faulty exploration strategy.
DiagnosticReport insertion_test(const RunTrace& trace);

/// Compares assigned log-volumes against the problem's analytic X(lambda)
/// at every dead contour the oracle covers. A point fails when its
/// deviation leaves the 5 sqrt(k)/n envelope (the accumulated mean-log
/// standard deviation); the verdict fails when more than 1% of covered
/// points do.
DiagnosticReport volume_check(const RunTrace& trace, const VolumeAssignment& volumes,
                              const Problem& problem);

/// |log Z_a - log Z_b| / sqrt(sigma_a^2 + sigma_b^2); values above 3
/// flag inconsistent runs. Throws when the problem fingerprints differ.
double two_run_consistency(const EvidenceReport& a, const EvidenceReport& b);

}  // namespace nested
