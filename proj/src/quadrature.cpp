#include "hotwall/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"

namespace hotwall::quad {
namespace {

constexpr int kProbes = 9;
constexpr int kTrendWindow = 8;
// Pieces stop here: beyond ~1e13 the cancellation between large terms of a
// log-integrand (e.g. c/p - xi/p near p = 0) swamps the trend.
constexpr double kFarEnd = 1e13;

double safe_eval(const Fn& f, double x) {
  const double v = f(x);
  return std::isnan(v) ? kNegInf : v;
}

// Largest log-value among interior probes and finite endpoint values of [a, b].
double probe_max(const Fn& lf, double a, double b) {
  double best = kNegInf;
  for (double x : {a, b}) {
    const double v = safe_eval(lf, x);
    if (v < kInf) best = std::max(best, v);
  }
  for (int i = 0; i < kProbes; ++i) {
    const double x = a + (b - a) * (i + 0.5) / kProbes;
    best = std::max(best, safe_eval(lf, x));
  }
  return best;
}

// One piece with b/a <= 2.
double log_piece(const Fn& lf, double a, double b) {
  const double m = probe_max(lf, a, b);
  if (m == kNegInf) return kNegInf;
  if (m == kInf) return kInf;
  auto g = [&](double x) {
    const double v = std::min(safe_eval(lf, x) - m, 700.0);
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  const double area =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 12, 1e-13);
  if (!(area > 0.0)) return kNegInf;
  return m + std::log(area);
}

bool nondecreasing(const std::vector<double>& s) {
  const std::size_t n = s.size();
  for (std::size_t i = n - kTrendWindow + 1; i < n; ++i) {
    if (s[i] == kNegInf) return false;
    const double slack = 1e-9 * std::max(1.0, std::abs(s[i - 1]));
    if (s[i] < s[i - 1] - slack) return false;
  }
  return true;
}

bool decreasing_or_vanishing(const std::vector<double>& s) {
  const std::size_t n = s.size();
  for (std::size_t i = n - kTrendWindow + 1; i < n; ++i) {
    if (s[i] == kNegInf) continue;
    const double slack = 1e-9 * std::max(1.0, std::abs(s[i - 1]));
    if (!(s[i] < s[i - 1] - slack)) return false;
  }
  return true;
}

}  // namespace

double log_integrate_finite(const Fn& lf, double a, double b) {
  if (!(b > a)) return kNegInf;
  LogSum total;
  double lo = a;
  while (lo < b) {
    const double hi = (lo > 0.0 && 2.0 * lo < b) ? 2.0 * lo : b;
    total.add(log_piece(lf, lo, hi));
    lo = hi;
  }
  return total.value();
}

LogIntegral log_integrate_tail(const Fn& ly, double y0, double tol) {
  const double log_tol = std::log(tol);
  const double far = std::max(kFarEnd, y0 * 65536.0);
  LogSum total;
  std::vector<double> trend;
  double last_piece = kNegInf;
  for (double lo = y0; 2.0 * lo <= far; lo *= 2.0) {
    const double hi = 2.0 * lo;
    const double m = probe_max(ly, lo, hi);
    if (m == kInf) return {kInf, Status::divergent};
    const double bound = m + std::log(hi - lo);
    trend.push_back(bound);
    const bool final_piece = 4.0 * lo > far;
    // Pieces that cannot matter at the requested tolerance are only probed.
    if (final_piece || bound > total.value() + log_tol - 5.0) {
      last_piece = log_piece(ly, lo, hi);
      total.add(last_piece);
    }
  }
  if (static_cast<int>(trend.size()) < kTrendWindow) {
    return {total.value(), Status::converged};
  }
  if (nondecreasing(trend)) return {kInf, Status::divergent};
  if (!decreasing_or_vanishing(trend)) return {total.value(), Status::inconclusive};
  // Geometric extrapolation of what lies beyond the last piece.
  double ratio = 0.0;
  for (std::size_t i = trend.size() - kTrendWindow + 1; i < trend.size(); ++i) {
    if (trend[i] == kNegInf) continue;
    ratio = std::max(ratio, std::exp(trend[i] - trend[i - 1]));
  }
  if (ratio > 0.0 && last_piece > kNegInf) {
    total.add(last_piece + std::log(ratio / (1.0 - ratio)));
  }
  return {total.value(), Status::converged};
}

LogIntegral log_integrate_range(const Fn& lf, double a, double b, double tol) {
  if (!(b > a)) return {kNegInf, Status::converged};
  const bool zero_end = (a <= 0.0);
  const bool inf_end = std::isinf(b);
  if (!zero_end && !inf_end) return {log_integrate_finite(lf, a, b), Status::converged};

  // u = 1/x maps (0, c] onto [1/c, inf) with Jacobian 1/u^2.
  auto near_zero = [&](double c) {
    return log_integrate_tail(
        [&](double u) { return safe_eval(lf, 1.0 / u) - 2.0 * std::log(u); }, 1.0 / c, tol);
  };

  if (zero_end && !inf_end) return near_zero(b);
  if (!zero_end && inf_end) {
    if (a >= 1.0) return log_integrate_tail(lf, a, tol);
    const LogIntegral tail = log_integrate_tail(lf, 1.0, tol);
    return {log_add_exp(log_integrate_finite(lf, a, 1.0), tail.log_value), tail.status};
  }
  const LogIntegral left = near_zero(1.0);
  const LogIntegral right = log_integrate_tail(lf, 1.0, tol);
  Status status = Status::converged;
  if (left.status == Status::divergent || right.status == Status::divergent) {
    status = Status::divergent;
  } else if (left.status == Status::inconclusive || right.status == Status::inconclusive) {
    status = Status::inconclusive;
  }
  return {status == Status::divergent ? kInf : log_add_exp(left.log_value, right.log_value),
          status};
}

namespace {

double signed_finite(const Fn& f, double a, double b) {
  KahanSum total;
  double lo = a;
  while (lo < b) {
    const double hi = (lo > 0.0 && 2.0 * lo < b) ? 2.0 * lo : b;
    total.add(
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, 1e-13));
    lo = hi;
  }
  return total.value();
}

double signed_tail(const Fn& f, double y0, double tol) {
  KahanSum total;
  double last = 0.0;
  int small = 0;
  for (double lo = y0; 2.0 * lo <= kFarEnd; lo *= 2.0) {
    const double piece =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, 2.0 * lo, 12, 1e-13);
    total.add(piece);
    last = piece;
    small = (std::abs(piece) <= tol * std::abs(total.value())) ? small + 1 : 0;
    if (small >= 4 * kTrendWindow) return total.value();
    if (2.0 * lo > 1e300) break;
  }
  if (std::abs(last) > tol * std::max(1.0, std::abs(total.value()))) {
    throw InconclusiveConvergence("signed integral: tail pieces do not vanish");
  }
  return total.value();
}

}  // namespace

double integrate_range(const Fn& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const bool zero_end = (a <= 0.0);
  const bool inf_end = std::isinf(b);
  auto g = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  auto near_zero = [&](double c) {
    return signed_tail([&](double u) { return g(1.0 / u) / (u * u); }, 1.0 / c, tol);
  };
  if (!zero_end && !inf_end) return signed_finite(g, a, b);
  if (zero_end && !inf_end) return near_zero(b);
  if (!zero_end) {
    if (a >= 1.0) return signed_tail(g, a, tol);
    return signed_finite(g, a, 1.0) + signed_tail(g, 1.0, tol);
  }
  return near_zero(1.0) + signed_tail(g, 1.0, tol);
}

double gauss_legendre(const Fn& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

}  // namespace hotwall::quad
