#include "nested/trace.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nested {

std::string RunTrace::problem_fingerprint() const {
  const auto cut = config_fingerprint.find(" | ");
  if (cut == std::string::npos) return config_fingerprint;
  return config_fingerprint.substr(0, cut);
}

ActiveCounter::ActiveCounter(const RunTrace& trace) {
  births_.reserve(trace.dead.size() + trace.final_live.size());
  deaths_.reserve(trace.dead.size() + trace.final_live.size());
  for (const auto& d : trace.dead) {
    births_.push_back(d.particle.birth_log_like.log());
    deaths_.push_back(d.particle.log_like.log());
  }
  // A final point covers contours up to its own likelihood (birth < c <= L),
  // exactly like a dead point; it just never produced a successor.
  for (const auto& p : trace.final_live) {
    births_.push_back(p.birth_log_like.log());
    deaths_.push_back(p.log_like.log());
  }
  std::sort(births_.begin(), births_.end());
  std::sort(deaths_.begin(), deaths_.end());
}

std::int64_t ActiveCounter::at(LogValue contour) const {
  const double c = contour.log();
  const auto nb = std::lower_bound(births_.begin(), births_.end(), c) - births_.begin();
  const auto nd = std::lower_bound(deaths_.begin(), deaths_.end(), c) - deaths_.begin();
  return static_cast<std::int64_t>(nb - nd);
}

std::int64_t active_count(const RunTrace& trace, LogValue contour) {
  if (trace.dead.empty() && trace.final_live.empty()) {
    throw std::invalid_argument("active_count: empty trace");
  }
  return ActiveCounter(trace).at(contour);
}

void check_trace(const RunTrace& trace) {
  const auto fail = [](const std::string& what) {
    throw std::logic_error("trace invariant violated: " + what);
  };
  if (trace.dead.empty()) return;

  const ActiveCounter counter(trace);
  std::set<double> death_contours;
  for (std::size_t i = 0; i < trace.dead.size(); ++i) {
    const auto& d = trace.dead[i];
    if (d.n_active < 1) fail("n_active < 1");
    if (!(d.particle.log_like > d.particle.birth_log_like)) {
      fail("death contour not above birth contour");
    }
    if (i > 0) {
      const auto& prev = trace.dead[i - 1];
      if (d.order < prev.order) fail("orders decrease");
      if (d.particle.log_like < prev.particle.log_like) {
        fail("likelihood decreases along the dead sequence");
      }
      if (d.order == prev.order &&
          d.particle.log_like != prev.particle.log_like) {
        fail("equal-order plateau group with mixed contours");
      }
      if (d.order == prev.order && d.n_active != prev.n_active) {
        fail("equal-order plateau group with mixed n_active");
      }
      if (d.order != prev.order &&
          d.particle.log_like == prev.particle.log_like) {
        fail("repeated death contour across iterations");
      }
    }
    if (counter.at(d.particle.log_like) != d.n_active) {
      std::ostringstream msg;
      msg << "recorded n_active " << d.n_active << " != reconstructed "
          << counter.at(d.particle.log_like) << " at order " << d.order;
      fail(msg.str());
    }
    death_contours.insert(d.particle.log_like.log());
  }
  const auto check_birth = [&](const Particle& p) {
    if (p.birth_log_like.is_zero()) return;
    if (!death_contours.count(p.birth_log_like.log())) {
      fail("birth contour matches no death contour");
    }
  };
  for (const auto& d : trace.dead) check_birth(d.particle);
  for (const auto& p : trace.final_live) check_birth(p);
}

const Particle& max_likelihood_particle(const RunTrace& trace) {
  const Particle* best = nullptr;
  for (const auto& d : trace.dead) {
    if (best == nullptr || d.particle.log_like > best->log_like) best = &d.particle;
  }
  for (const auto& p : trace.final_live) {
    if (best == nullptr || p.log_like > best->log_like) best = &p;
  }
  if (best == nullptr) throw std::invalid_argument("max_likelihood_particle: empty trace");
  return *best;
}

}  // namespace nested
