#pragma once

// Small numerical helpers shared across modules: log-space arithmetic and
// compensated summation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>

namespace hotwall {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b), exact for infinite arguments.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a == kInf || b == kInf) return kInf;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// log(e^a - e^b) for a >= b. Returns -inf when a == b.
inline double log_sub_exp(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  const double d = b - a;
  // log1p(-e^d) loses accuracy for d near 0; use expm1 branch there.
  return a + (d > -0.693 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

double log_sum_exp(std::span<const double> terms);

/// Running log-sum-exp accumulator.
class LogSum {
 public:
  void add(double log_term) { value_ = log_add_exp(value_, log_term); }
  double value() const { return value_; }

 private:
  double value_ = kNegInf;
};

/// Kahan–Babuska compensated sum.
class KahanSum {
 public:
  KahanSum() = default;
  explicit KahanSum(double start) : sum_(start) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean and standard error of a sample, computed with Welford's update.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace hotwall
