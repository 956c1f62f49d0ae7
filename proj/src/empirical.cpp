#include "hotwall/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/quadrature.hpp"

namespace hotwall {

template <typename Real>
Real BasicEmpiricalMeasure<Real>::total_weight() const {
  Real s{0};
  for (const auto& c : components_) s += c.weight;
  return s;
}

template <typename Real>
Real BasicEmpiricalMeasure<Real>::mean_momentum() const {
  Real s{0};
  for (const auto& c : components_) s += c.weight * c.momentum;
  return s;
}

template <typename Real>
BasicEmpiricalMeasure<Real> BasicEmpiricalMeasure<Real>::compact() const {
  std::map<std::tuple<Real, Real, Real>, Real> acc;
  for (const auto& c : components_) {
    if (c.weight == Real(0)) continue;
    acc[{c.momentum, c.a, c.b}] += c.weight;
  }
  std::vector<Component> out;
  out.reserve(acc.size());
  for (const auto& [k, w] : acc) out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), w});
  return {std::move(out), total_time_};
}

template class BasicEmpiricalMeasure<double>;
template class BasicEmpiricalMeasure<Rational>;

namespace {

// Exact epochs and momenta in the requested arithmetic.
template <typename Real>
struct PathView {
  Real t0;
  std::vector<Real> epochs;  // epochs[n] = T0 + tau_1 + ... + tau_n
  std::vector<Real> speed;
};

PathView<double> view(const Trajectory& traj, double) {
  PathView<double> v{traj.t0(), {}, {}};
  v.epochs.reserve(traj.cycles().size() + 1);
  for (std::size_t n = 0; n <= traj.cycles().size(); ++n) v.epochs.push_back(traj.epoch(n));
  for (const auto& c : traj.cycles()) v.speed.push_back(c.speed);
  return v;
}

PathView<Rational> view(const Trajectory& traj, const Rational&) {
  PathView<Rational> v{exact_t0(traj), {}, {}};
  v.epochs.reserve(traj.cycles().size() + 1);
  v.epochs.push_back(v.t0);
  for (const auto& c : traj.cycles()) {
    const Rational tau(c.tau);
    v.epochs.push_back(v.epochs.back() + tau);
    v.speed.push_back(1 / tau);
  }
  return v;
}

template <typename Real>
Real clamp01(const Real& x) {
  if (x < Real(0)) return Real(0);
  if (x > Real(1)) return Real(1);
  return x;
}

template <typename Real>
BasicEmpiricalMeasure<Real> occupation(const Trajectory& traj, const Real& from, const Real& to) {
  if (!(from >= Real(0)) || !(to > from)) {
    throw std::invalid_argument("occupation_measure: need 0 <= from < to");
  }
  const PathView<Real> pv = view(traj, from);
  if (to > pv.epochs.back()) {
    throw HorizonExceeded(fmt::format("occupation_measure: window end {:.17g} beyond covered time {:.17g}",
                                      static_cast<double>(to), static_cast<double>(pv.epochs.back())));
  }
  const Real len = to - from;
  std::vector<MeasureComponent<Real>> out;
  auto piece = [&](const Real& s0, const Real& s1, const Real& qa, const Real& p) {
    // Segment [s0, s1) on which q = qa + p (s - s0).
    const Real lo = std::max(s0, from);
    const Real hi = std::min(s1, to);
    if (!(hi > lo)) return;
    const Real a = clamp01(Real(qa + p * (lo - s0)));
    const Real b = clamp01(Real(qa + p * (hi - s0)));
    out.push_back({p, a, b, Real((hi - lo) / len)});
  };
  if (traj.delayed() && pv.t0 > Real(0)) {
    piece(Real(0), pv.t0, Real(traj.q0()), Real(traj.p0()));
  }
  // First cycle that can intersect the window.
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(pv.epochs.begin(), pv.epochs.end(), from) - pv.epochs.begin());
  i = i == 0 ? 0 : i - 1;
  for (; i < traj.cycles().size() && pv.epochs[i] < to; ++i) {
    piece(pv.epochs[i], pv.epochs[i + 1], Real(0), pv.speed[i]);
  }
  return {std::move(out), len};
}

template <typename Real>
Real tv_impl(const BasicEmpiricalMeasure<Real>& mu, const BasicEmpiricalMeasure<Real>& nu) {
  std::map<std::pair<Real, Real>, Real> points;
  std::map<Real, std::vector<std::pair<Real, Real>>> events;  // momentum -> (position, density jump)
  auto add = [&](const BasicEmpiricalMeasure<Real>& m, int sign) {
    for (const auto& c : m.components()) {
      if (c.weight == Real(0)) continue;
      if (c.is_point()) {
        points[{c.momentum, c.a}] += sign * c.weight;
        continue;
      }
      const Real d = sign * c.weight / (c.b - c.a);
      auto& ev = events[c.momentum];
      ev.emplace_back(c.a, d);
      ev.emplace_back(c.b, Real(-d));
    }
  };
  add(mu, 1);
  add(nu, -1);
  Real total{0};
  for (const auto& [k, w] : points) total += w < Real(0) ? Real(-w) : w;
  for (auto& [p, ev] : events) {
    std::sort(ev.begin(), ev.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    Real density{0};
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
      density += ev[k].second;
      const Real width = ev[k + 1].first - ev[k].first;
      if (width > Real(0)) total += (density < Real(0) ? Real(-density) : density) * width;
    }
  }
  return total / 2;
}

template <typename Real>
BasicEmpiricalMeasure<Real> merge_impl(const BasicEmpiricalMeasure<Real>& mu,
                                       const BasicEmpiricalMeasure<Real>& nu) {
  const Real t = mu.total_time() + nu.total_time();
  if (!(t > Real(0))) throw std::invalid_argument("merge: measures carry no time");
  std::vector<MeasureComponent<Real>> out;
  out.reserve(mu.components().size() + nu.components().size());
  for (const auto* m : {&mu, &nu}) {
    const Real s = m->total_time() / t;
    for (auto c : m->components()) {
      c.weight *= s;
      out.push_back(std::move(c));
    }
  }
  return {std::move(out), t};
}

// Integral of the unit hat centered at 0 with half-width 1, from -inf to x.
double hat_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x <= 0.0) return 0.5 * (x + 1.0) * (x + 1.0);
  if (x <= 1.0) return 1.0 - 0.5 * (1.0 - x) * (1.0 - x);
  return 1.0;
}

double hat(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

// Average over q in [a, b) (or the value at a when a == b) of the hat at node
// `center` with half-width h.
double hat_average(double a, double b, double center, double h) {
  if (!(b > a)) return hat((a - center) / h);
  return h * (hat_cdf((b - center) / h) - hat_cdf((a - center) / h)) / (b - a);
}

double compactify(double p) { return std::isinf(p) ? 1.0 : p / (1.0 + p); }

// Values of every family member on one measure, in a fixed order.
std::vector<double> bl_moments(const EmpiricalMeasure& mu, const BlFamily& family) {
  std::vector<double> out(family.size(), 0.0);
  std::vector<double> hq;
  std::vector<double> hu;
  for (const auto& c : mu.components()) {
    std::size_t idx = 0;
    const double u = compactify(c.momentum);
    for (int n : family.levels) {
      const double h = 1.0 / (n - 1);
      const double scale = 1.0 / n;
      hq.assign(static_cast<std::size_t>(n), 0.0);
      hu.assign(static_cast<std::size_t>(n), 0.0);
      for (int k = 0; k < n; ++k) {
        hq[static_cast<std::size_t>(k)] = hat_average(c.a, c.b, k * h, h);
        hu[static_cast<std::size_t>(k)] = hat((u - k * h) / h);
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          out[idx++] += c.weight * scale * hq[static_cast<std::size_t>(i)] *
                        hu[static_cast<std::size_t>(j)];
        }
      }
      for (int i = 0; i < n; ++i) out[idx++] += c.weight * scale * hq[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) out[idx++] += c.weight * scale * hu[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace

Rational exact_t0(const Trajectory& traj) {
  if (!traj.delayed()) return Rational(0);
  return (1 - Rational(traj.q0())) / Rational(traj.p0());
}

EmpiricalMeasure occupation_measure(const Trajectory& traj, double from, double to) {
  return occupation<double>(traj, from, to);
}

ExactEmpiricalMeasure occupation_measure(const Trajectory& traj, const Rational& from,
                                         const Rational& to) {
  return occupation<Rational>(traj, from, to);
}

EmpiricalMeasure empirical_measure(const Trajectory& traj, double t, bool delayed) {
  if (delayed) return occupation<double>(traj, 0.0, t);
  return occupation<double>(traj, traj.t0(), traj.t0() + t);
}

ExactEmpiricalMeasure exact_empirical_measure(const Trajectory& traj, const Rational& t,
                                              bool delayed) {
  if (delayed) return occupation<Rational>(traj, Rational(0), t);
  const Rational t0 = exact_t0(traj);
  return occupation<Rational>(traj, t0, t0 + t);
}

EmpiricalMeasure to_double(const ExactEmpiricalMeasure& mu) {
  std::vector<MeasureComponent<double>> out;
  out.reserve(mu.components().size());
  for (const auto& c : mu.components()) {
    out.push_back({static_cast<double>(c.momentum), static_cast<double>(c.a),
                   static_cast<double>(c.b), static_cast<double>(c.weight)});
  }
  return {std::move(out), static_cast<double>(mu.total_time())};
}

EmpiricalMeasure merge(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  return merge_impl(mu, nu);
}

ExactEmpiricalMeasure merge(const ExactEmpiricalMeasure& mu, const ExactEmpiricalMeasure& nu) {
  return merge_impl(mu, nu);
}

double integrate(const EmpiricalMeasure& mu, const MeasureFn& f) {
  KahanSum s;
  for (const auto& c : mu.components()) {
    if (c.weight == 0.0) continue;
    if (c.is_point()) {
      s.add(c.weight * f(c.a, c.momentum));
      continue;
    }
    const double avg =
        quad::gauss_legendre([&](double q) { return f(q, c.momentum); }, c.a, c.b) / (c.b - c.a);
    s.add(c.weight * avg);
  }
  return s.value();
}

double integrate_with_antiderivative(const EmpiricalMeasure& mu, const MeasureFn& antiderivative,
                                     const MeasureFn& f_at_point) {
  KahanSum s;
  for (const auto& c : mu.components()) {
    if (c.weight == 0.0) continue;
    if (c.is_point()) {
      s.add(c.weight * f_at_point(c.a, c.momentum));
    } else {
      s.add(c.weight * (antiderivative(c.b, c.momentum) - antiderivative(c.a, c.momentum)) /
            (c.b - c.a));
    }
  }
  return s.value();
}

double tv_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  return std::clamp(tv_impl(mu, nu), 0.0, 1.0);
}

Rational tv_distance(const ExactEmpiricalMeasure& mu, const ExactEmpiricalMeasure& nu) {
  return tv_impl(mu, nu);
}

std::size_t BlFamily::size() const {
  std::size_t n = 0;
  for (int k : levels) {
    if (k < 2) throw std::invalid_argument("BlFamily: levels must be >= 2");
    n += static_cast<std::size_t>(k * k + 2 * k);
  }
  return n;
}

double bl_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   const BlFamily& family) {
  const auto a = bl_moments(mu.compact(), family);
  const auto b = bl_moments(nu.compact(), family);
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

MeasureDistanceReport compare(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                              const BlFamily& family) {
  std::vector<double> momenta;
  for (const auto* m : {&mu, &nu}) {
    for (const auto& c : m->components()) momenta.push_back(c.momentum);
  }
  std::sort(momenta.begin(), momenta.end());
  const auto distinct =
      static_cast<std::size_t>(std::unique(momenta.begin(), momenta.end()) - momenta.begin());
  return {tv_distance(mu, nu), bl_distance(mu, nu, family), family.size(), distinct};
}

EmpiricalMeasure product_target(const ProbabilityLaw& pi) {
  if (!pi.is_atomic()) {
    throw NonAtomicTarget("product_target: exact targets need an atomic law; use bl_distance with a sampled target");
  }
  std::vector<MeasureComponent<double>> out;
  for (const auto& a : pi.atomic_part().atoms) {
    const double w = std::exp(a.log_weight);
    if (w > 0.0) out.push_back({a.location, 0.0, 1.0, w});
  }
  return {std::move(out), 0.0};
}

EmpiricalMeasure lambda_component(double ell, double momentum, double weight) {
  if (!(ell >= 0.0 && ell <= 1.0)) throw std::invalid_argument("lambda_component: ell must lie in [0, 1]");
  return {{{momentum, 0.0, ell, weight}}, 0.0};
}

void write_histogram(std::ostream& os, const EmpiricalMeasure& mu, int n_q,
                     const std::vector<double>& p_edges) {
  if (n_q < 1 || p_edges.size() < 2) throw std::invalid_argument("write_histogram: need bins");
  const std::size_t n_p = p_edges.size() - 1;
  std::vector<double> mass(static_cast<std::size_t>(n_q) * n_p, 0.0);
  for (const auto& c : mu.components()) {
    const auto it = std::upper_bound(p_edges.begin(), p_edges.end(), c.momentum);
    std::size_t pb = it == p_edges.begin() ? 0 : static_cast<std::size_t>(it - p_edges.begin()) - 1;
    pb = std::min(pb, n_p - 1);
    for (int k = 0; k < n_q; ++k) {
      const double lo = static_cast<double>(k) / n_q;
      const double hi = static_cast<double>(k + 1) / n_q;
      double frac = 0.0;
      if (c.is_point()) {
        frac = (c.a >= lo && (c.a < hi || k == n_q - 1)) ? 1.0 : 0.0;
      } else {
        frac = std::max(0.0, std::min(hi, c.b) - std::max(lo, c.a)) / (c.b - c.a);
      }
      mass[static_cast<std::size_t>(k) * n_p + pb] += c.weight * frac;
    }
  }
  os << "q_bin,p_bin,mass\n";
  for (int k = 0; k < n_q; ++k) {
    for (std::size_t j = 0; j < n_p; ++j) {
      os << fmt::format("{},{},{:.17g}\n", k, j, mass[static_cast<std::size_t>(k) * n_p + j]);
    }
  }
}

}  // namespace hotwall
