#pragma once

#include <cmath>
#include <compare>
#include <limits>

namespace nested {

/// A non-negative real stored as its natural logarithm.
/// log(0) is represented by -infinity; it absorbs under multiplication and
/// is the identity of log-space addition. Likelihoods, evidences and
/// weights all live in this type.
class LogValue {
 public:
  constexpr LogValue() = default;
  constexpr explicit LogValue(double log_v) : log_v_(log_v) {}

  static constexpr LogValue zero() { return LogValue(); }
  static constexpr LogValue one() { return LogValue(0.0); }
  static LogValue from_linear(double v) {
    return v > 0.0 ? LogValue(std::log(v)) : zero();
  }

  constexpr double log() const { return log_v_; }
  double linear() const { return std::exp(log_v_); }
  constexpr bool is_zero() const {
    return log_v_ == -std::numeric_limits<double>::infinity();
  }
  constexpr bool is_finite() const { return std::isfinite(log_v_); }

  friend constexpr bool operator==(LogValue a, LogValue b) = default;
  friend constexpr auto operator<=>(LogValue a, LogValue b) {
    return a.log_v_ <=> b.log_v_;
  }

  friend LogValue operator*(LogValue a, LogValue b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogValue(a.log_v_ + b.log_v_);
  }

 private:
  double log_v_ = -std::numeric_limits<double>::infinity();
};

/// log(exp a + exp b), stable: the larger argument is factored out.
inline LogValue log_add(LogValue a, LogValue b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const double hi = std::max(a.log(), b.log());
  const double lo = std::min(a.log(), b.log());
  return LogValue(hi + std::log1p(std::exp(lo - hi)));
}

/// log(exp a - exp b); requires a >= b. Returns log 0 when a == b.
inline LogValue log_sub(LogValue a, LogValue b) {
  if (b.is_zero()) return a;
  if (a == b) return LogValue::zero();
  return LogValue(a.log() + std::log1p(-std::exp(b.log() - a.log())));
}

/// Streaming log-space sum: keeps a running maximum and the sum of
/// exponentials scaled by it, so N equal terms accumulate to log(N x)
/// without loss.
class LogSum {
 public:
  void add(LogValue v) {
    if (v.is_zero()) return;
    const double x = v.log();
    if (scaled_ == 0.0) {
      max_ = x;
      scaled_ = 1.0;
    } else if (x <= max_) {
      scaled_ += std::exp(x - max_);
    } else {
      scaled_ = scaled_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }

  LogValue total() const {
    if (scaled_ == 0.0) return LogValue::zero();
    return LogValue(max_ + std::log(scaled_));
  }

 private:
  double max_ = 0.0;
  double scaled_ = 0.0;  // sum of exp(x_i - max_); 0 means empty
};

}  // namespace nested
