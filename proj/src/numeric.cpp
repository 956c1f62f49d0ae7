#include "hotwall/numeric.hpp"

#include <algorithm>

namespace hotwall {

double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf || m == kInf) return m;
  KahanSum s;
  for (double t : terms) {
    if (t != kNegInf) s.add(std::exp(t - m));
  }
  return m + std::log(s.value());
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

}  // namespace hotwall
