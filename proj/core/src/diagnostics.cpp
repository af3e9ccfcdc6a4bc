#include "nested/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "nested/special.hpp"

namespace nested {

namespace {

constexpr int kInsertionBins = 32;

// One recorded insertion: the rank, the live count n that normalizes it,
// and the iteration at which the particle was born (the test sequence is
// ordered by birth, not death: ordering by death would bias early blocks
// toward low ranks, which die sooner).
struct InsertionRecord {
  std::int64_t birth_order;
  std::int64_t index;
  std::int64_t n;
};

// Chi-squared against the exact discrete null: rank k of a point with
// live count n sits at (k + 0.5)/n, so with 32 bins the expected bin
// occupancy is not flat unless 32 | n. Expected counts are accumulated
// per distinct n.
double chi_squared_insertions_p(std::span<const InsertionRecord> records) {
  std::vector<double> observed(kInsertionBins, 0.0);
  std::vector<double> expected(kInsertionBins, 0.0);
  std::map<std::int64_t, std::int64_t> count_per_n;
  for (const auto& r : records) {
    int bin = static_cast<int>((static_cast<double>(r.index) + 0.5) /
                               static_cast<double>(r.n) * kInsertionBins);
    bin = std::clamp(bin, 0, kInsertionBins - 1);
    observed[bin] += 1.0;
    ++count_per_n[r.n];
  }
  for (const auto& [n, m] : count_per_n) {
    for (std::int64_t k = 0; k < n; ++k) {
      int bin = static_cast<int>((static_cast<double>(k) + 0.5) /
                                 static_cast<double>(n) * kInsertionBins);
      bin = std::clamp(bin, 0, kInsertionBins - 1);
      expected[bin] += static_cast<double>(m) / static_cast<double>(n);
    }
  }
  double stat = 0.0;
  int dof = -1;  // one constraint: totals match
  for (int b = 0; b < kInsertionBins; ++b) {
    if (expected[b] <= 0.0) continue;
    const double r = observed[b] - expected[b];
    stat += r * r / expected[b];
    ++dof;
  }
  if (dof < 1) return 1.0;
  return chi_squared_sf(stat, dof);
}

Verdict verdict_from_p(double p, const DiagnosticReport& thresholds) {
  if (p < thresholds.fail_below) return Verdict::fail;
  if (p < thresholds.warn_below) return Verdict::warn;
  return Verdict::pass;
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::fail: return "fail";
  }
  return "unknown";
}

DiagnosticReport insertion_test(const RunTrace& trace) {
  DiagnosticReport report;

  // Birth iteration of a contour: the order of the dead group that died
  // there (every birth contour is an earlier death contour or log 0).
  std::map<double, std::int64_t> order_of_contour;
  std::map<double, std::int64_t> n_active_of_contour;
  std::int64_t nlive = 0;
  for (const auto& d : trace.dead) {
    if (nlive == 0) nlive = d.n_active;
    order_of_contour.emplace(d.particle.log_like.log(), d.order);
    n_active_of_contour.emplace(d.particle.log_like.log(), d.n_active);
  }

  // Every born particle contributes once, dead or still live at the end;
  // dropping survivors would deplete the high ranks. Initial prior draws
  // carry no insertion record (-1) and are skipped. Dead points are
  // normalized by their own n_active, final points by the live count at
  // their birth contour (the documented convention; the two coincide on
  // static runs).
  std::vector<InsertionRecord> records;
  for (const auto& d : trace.dead) {
    if (d.insertion_index < 0) continue;
    const auto it = order_of_contour.find(d.particle.birth_log_like.log());
    const std::int64_t born = it == order_of_contour.end() ? 0 : it->second;
    records.push_back({born, d.insertion_index, d.n_active});
  }
  for (const auto& p : trace.final_live) {
    if (p.insertion_index < 0) continue;
    const auto it = order_of_contour.find(p.birth_log_like.log());
    const std::int64_t born = it == order_of_contour.end() ? 0 : it->second;
    const auto n_it = n_active_of_contour.find(p.birth_log_like.log());
    const std::int64_t n = n_it == n_active_of_contour.end()
                               ? std::max<std::int64_t>(nlive, 1)
                               : n_it->second;
    records.push_back({born, p.insertion_index, n});
  }
  if (records.empty()) {
    throw std::invalid_argument("insertion_test: trace records no insertion indexes");
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const InsertionRecord& a, const InsertionRecord& b) {
                     return a.birth_order < b.birth_order;
                   });
  report.low_power =
      static_cast<std::int64_t>(records.size()) < 10 * std::max<std::int64_t>(nlive, 1);

  report.insertion_p_global = chi_squared_insertions_p(records);

  // Non-overlapping blocks of nlive consecutive insertions (in birth
  // order), each tested alone; the corrected minimum flags locally broken
  // stretches that the pooled test can wash out.
  const std::size_t block = static_cast<std::size_t>(std::max<std::int64_t>(nlive, 2));
  for (std::size_t start = 0; start + block <= records.size(); start += block) {
    report.insertion_p_rolling.push_back(chi_squared_insertions_p(
        std::span<const InsertionRecord>(records).subspan(start, block)));
  }
  if (!report.insertion_p_rolling.empty()) {
    const double min_p = *std::min_element(report.insertion_p_rolling.begin(),
                                           report.insertion_p_rolling.end());
    report.insertion_p_rolling_corrected =
        std::min(1.0, min_p * static_cast<double>(report.insertion_p_rolling.size()));
  }

  report.verdict = verdict_from_p(
      std::min(report.insertion_p_global, report.insertion_p_rolling_corrected), report);
  return report;
}

DiagnosticReport volume_check(const RunTrace& trace, const VolumeAssignment& volumes,
                              const Problem& problem) {
  if (!problem.oracle().log_x_of_loglike) {
    throw std::invalid_argument("volume_check: problem has no X(lambda) oracle");
  }
  if (volumes.log_x.size() != trace.dead.size()) {
    throw std::invalid_argument("volume_check: volumes inconsistent with trace");
  }
  DiagnosticReport report;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < trace.dead.size(); ++i) {
    const auto truth =
        problem.oracle().log_x_of_loglike(trace.dead[i].particle.log_like.log());
    if (!truth) continue;
    const double k = static_cast<double>(trace.dead[i].order) + 1.0;
    const double envelope =
        5.0 * std::sqrt(k) / static_cast<double>(trace.dead[i].n_active);
    report.volume_deviations.push_back({trace.dead[i].particle.log_like.log(),
                                        volumes.log_x[i], *truth, envelope});
    if (std::abs(volumes.log_x[i] - *truth) > envelope) ++violations;
  }
  if (!report.volume_deviations.empty()) {
    report.volume_violation_fraction =
        static_cast<double>(violations) /
        static_cast<double>(report.volume_deviations.size());
  }
  report.verdict =
      report.volume_violation_fraction > 0.01 ? Verdict::fail : Verdict::pass;
  return report;
}

double two_run_consistency(const EvidenceReport& a, const EvidenceReport& b) {
  if (a.fingerprint != b.fingerprint) {
    throw std::invalid_argument("two_run_consistency: problem fingerprints differ: '" +
                                a.fingerprint + "' vs '" + b.fingerprint + "'");
  }
  const double denom = std::sqrt(a.sigma_log_z * a.sigma_log_z +
                                 b.sigma_log_z * b.sigma_log_z);
  if (!(denom > 0.0)) {
    throw std::domain_error("two_run_consistency: zero combined uncertainty");
  }
  return std::abs(a.log_z - b.log_z) / denom;
}

}  // namespace nested
