#include "hotwall/rare_event.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "hotwall/errors.hpp"
#include "hotwall/numeric.hpp"

namespace hotwall {

// ---- events ----

EventSpec EventSpec::always() {
  EventSpec e;
  e.label = "always";
  return e;
}

EventSpec EventSpec::mean_momentum_exceeds(double m) {
  EventSpec e;
  e.kind = Kind::mean_momentum_exceeds;
  e.threshold = m;
  e.label = fmt::format("mean_momentum>{:g}", m);
  return e;
}

EventSpec EventSpec::bl_ball(EmpiricalMeasure center, double radius) {
  EventSpec e;
  e.kind = Kind::bl_ball;
  e.threshold = radius;
  e.center = center.compact();
  e.label = fmt::format("bl_ball(r={:g})", radius);
  return e;
}

EventSpec EventSpec::momentum_marginal_ball(EmpiricalMeasure center, double radius) {
  EventSpec e;
  e.kind = Kind::momentum_marginal_ball;
  e.threshold = radius;
  e.center = momentum_marginal(center);
  e.label = fmt::format("momentum_marginal_ball(r={:g})", radius);
  return e;
}

EventSpec EventSpec::custom(std::function<bool(const Trajectory&, double)> predicate,
                            std::string label) {
  EventSpec e;
  e.kind = Kind::custom;
  e.predicate = std::move(predicate);
  e.label = std::move(label);
  return e;
}

bool EventSpec::operator()(const Trajectory& path, double t) const {
  switch (kind) {
    case Kind::always:
      return true;
    case Kind::mean_momentum_exceeds:
      return mean_momentum(path, t) > threshold;
    case Kind::bl_ball:
      return bl_distance(empirical_measure(path, t).compact(), center) <= threshold;
    case Kind::momentum_marginal_ball:
      return bl_distance(momentum_marginal(empirical_measure(path, t)), center) <= threshold;
    case Kind::custom:
      return predicate(path, t);
  }
  return false;
}

EmpiricalMeasure momentum_marginal(const EmpiricalMeasure& mu) {
  std::vector<EmpiricalMeasure::Component> out;
  out.reserve(mu.components().size());
  for (const auto& c : mu.components()) out.push_back({c.momentum, 0.0, 1.0, c.weight});
  return EmpiricalMeasure(std::move(out), mu.total_time()).compact();
}

EmpiricalMeasure non_ldp_center(double alpha, double ell, const ProbabilityLaw& phi) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("non_ldp_center: alpha");
  std::vector<EmpiricalMeasure::Component> out;
  for (const auto& c : lambda_component(ell, 0.0, 1.0 - alpha).components()) out.push_back(c);
  if (alpha > 0.0) {
    const auto gamma = frozen_momentum_law(phi);
    if (!gamma) {
      out.push_back({0.0, 0.0, 1.0, alpha});
    } else {
      for (const auto& c : product_target(*gamma).components()) {
        out.push_back({c.momentum, c.a, c.b, alpha * c.weight});
      }
    }
  }
  return EmpiricalMeasure(std::move(out), 0.0).compact();
}

// ---- tilted laws ----

TiltedScheme TiltedScheme::slow_reentry(double ell, double delta, double t) {
  if (!(ell > 0.0 && ell < 1.0)) throw std::invalid_argument("slow_reentry: ell must be in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("slow_reentry: delta must be in (0, 1)");
  if (!(t > 0.0)) throw std::invalid_argument("slow_reentry: t must be positive");
  TiltedScheme s;
  s.mode = TiltMode::slow_reentry_only;
  s.alpha = 0.0;
  s.ell = ell;
  s.delta = delta;
  s.t = t;
  s.k_lo = ell * (1.0 - delta) / t;
  s.k_hi = ell * (1.0 + delta) / t;
  return s;
}

TiltedScheme TiltedScheme::ll_plus_slow_reentry(double alpha, const ProbabilityLaw& pi_tilde,
                                                double ell, double delta, double t) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ll_plus_slow_reentry: alpha must be in (0, 1)");
  if (!(ell > 0.0 && ell < 1.0)) throw std::invalid_argument("ll_plus_slow_reentry: ell must be in (0, 1)");
  if (!(delta > 0.0 && delta < (1.0 - alpha) / 2.0)) {
    throw std::invalid_argument("ll_plus_slow_reentry: delta must be in (0, (1 - alpha)/2)");
  }
  const ExtendedReal recip = mean_reciprocal(pi_tilde);
  if (recip.is_infinite() || recip.is_zero()) {
    throw std::invalid_argument("ll_plus_slow_reentry: pi~ must have a finite positive mean of 1/p");
  }
  TiltedScheme s;
  s.mode = TiltMode::ll_plus_slow_reentry;
  s.alpha = alpha;
  s.ell = ell;
  s.delta = delta;
  s.t = t;
  s.pi_tilde = pi_tilde;
  s.mean_speed = 1.0 / recip.value();
  s.n_tilted = static_cast<std::size_t>(std::floor(alpha * s.mean_speed * t));
  s.k_lo = std::max(0.0, (ell - delta) / ((1.0 - alpha - delta) * t));
  s.k_hi = (ell + delta) / ((1.0 - alpha + delta) * t);
  return s;
}

TiltedScheme TiltedScheme::make(double alpha, const ProbabilityLaw& pi_tilde, double ell,
                                double delta, double t) {
  if (alpha == 0.0) return slow_reentry(ell, delta, t);
  return ll_plus_slow_reentry(alpha, pi_tilde, ell, delta, t);
}

TiltedScheme TiltedScheme::no_tilt(const ProbabilityLaw& phi, double t) {
  return custom(phi, 0, 0.0, kInf, t);
}

TiltedScheme TiltedScheme::custom(const ProbabilityLaw& pi_tilde, std::size_t n_tilted,
                                  double k_lo, double k_hi, double t) {
  TiltedScheme s;
  s.mode = TiltMode::ll_plus_slow_reentry;
  s.t = t;
  s.pi_tilde = pi_tilde;
  s.n_tilted = n_tilted;
  s.k_lo = k_lo;
  s.k_hi = k_hi;
  if (n_tilted > 0) {
    const ExtendedReal recip = mean_reciprocal(pi_tilde);
    s.mean_speed = recip.is_finite() && !recip.is_zero() ? 1.0 / recip.value() : 0.0;
  }
  return s;
}

std::string TiltedScheme::describe() const {
  return fmt::format("{}(alpha={:g}, ell={:g}, delta={:g}, t={:.17g}, T={}, K=[{:.17g}, {:.17g}))",
                     mode == TiltMode::slow_reentry_only ? "slow_reentry" : "ll_plus_slow_reentry",
                     alpha, ell, delta, t, n_tilted, k_lo, k_hi);
}

double matched_time(double alpha, double ell, double v) { return ell / ((1.0 - alpha) * v); }

namespace {

bool full_window(const TiltedScheme& s) { return s.k_lo <= 0.0 && s.k_hi == kInf; }

double scheme_log_window(const TiltedScheme& s, const ProbabilityLaw& phi) {
  if (full_window(s)) return 0.0;
  if (!(s.k_lo < s.k_hi)) return kNegInf;
  return log_mass(phi, s.k_lo, s.k_hi);
}

}  // namespace

TiltedSampler::TiltedSampler(TiltedScheme scheme, ProbabilityLaw phi)
    : scheme_(std::move(scheme)),
      phi_(std::move(phi)),
      ratio_(scheme_.n_tilted > 0 ? scheme_.pi_tilde : phi_, phi_),
      log_window_(scheme_log_window(scheme_, phi_)) {
  if (log_window_ == kNegInf) {
    throw EmptyWindow(fmt::format("phi(K) = 0 for {}", scheme_.describe()));
  }
}

TiltedPath TiltedSampler::sample(Rng& rng) const {
  const std::size_t n = scheme_.n_tilted;
  const bool full = full_window(scheme_);
  KahanSum lr(log_window_);
  std::size_t drawn = 0;
  const auto draw = [&]() -> Cycle {
    ++drawn;
    if (drawn <= n) {
      const SpeedDraw d = sample_pair(scheme_.pi_tilde, rng);
      lr.add(-ratio_(d.speed));
      return {d.tau, d.speed};
    }
    if (drawn == n + 1 && !full) {
      const SpeedDraw d = sample_conditional(phi_, scheme_.k_lo, scheme_.k_hi, rng);
      return {d.tau, d.speed};
    }
    const SpeedDraw d = sample_pair(phi_, rng);
    return {d.tau, d.speed};
  };
  Trajectory path = Trajectory::undelayed();
  while (path.covered() <= scheme_.t || drawn < n + 1) path.append(draw());
  return {std::move(path), lr.value()};
}

TiltedPath tilted_sampler(const TiltedScheme& scheme, const ProbabilityLaw& phi, Rng& rng) {
  return TiltedSampler(scheme, phi).sample(rng);
}

ExtendedReal entropy_cost(const TiltedScheme& scheme, const ProbabilityLaw& phi) {
  const double lw = scheme_log_window(scheme, phi);
  if (lw == kNegInf) return ExtendedReal::infinity();
  ExtendedReal h;
  if (scheme.n_tilted > 0) {
    h = ExtendedReal(static_cast<double>(scheme.n_tilted)) * relative_entropy(scheme.pi_tilde, phi);
  }
  return h + ExtendedReal(std::max(0.0, -lw));
}

// ---- estimators ----

namespace {

struct WeightAccumulator {
  LogSum s1;
  LogSum s2;
  std::size_t hits = 0;
  std::size_t n = 0;
  bool unit = true;  // every hit had weight 1

  void add_hit(double log_w) {
    unit = unit && log_w == 0.0;
    s1.add(log_w);
    s2.add(2.0 * log_w);
    ++hits;
  }
  void merge(const WeightAccumulator& o) {
    s1.add(o.s1.value());
    s2.add(o.s2.value());
    hits += o.hits;
    n += o.n;
    unit = unit && o.unit;
  }
};

ProbabilityEstimate finish(const WeightAccumulator& acc) {
  ProbabilityEstimate e;
  e.n = acc.n;
  e.hits = acc.hits;
  if (acc.n == 0 || acc.hits == 0) {
    e.degenerate_ess = true;
    return e;
  }
  const double log_n = std::log(static_cast<double>(acc.n));
  if (acc.unit) {
    // Plain indicator average: exact counts, binomial standard error.
    const double p = static_cast<double>(acc.hits) / static_cast<double>(acc.n);
    e.estimate = p;
    e.log_estimate = std::log(static_cast<double>(acc.hits)) - log_n;
    if (acc.n > 1) e.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(acc.n - 1));
    e.log_stderr = e.stderr_ > 0.0 ? std::log(e.stderr_) : kNegInf;
    e.ess = static_cast<double>(acc.hits);
    e.degenerate_ess = e.ess < 10.0;
    return e;
  }
  e.log_estimate = acc.s1.value() - log_n;
  e.estimate = std::exp(e.log_estimate);
  if (acc.n > 1) {
    const double log_m2 = acc.s2.value() - log_n;
    const double log_var = log_sub_exp(log_m2, 2.0 * e.log_estimate) + log_n -
                           std::log(static_cast<double>(acc.n - 1));
    e.log_stderr = 0.5 * (log_var - log_n);
    e.stderr_ = std::exp(e.log_stderr);
  }
  e.ess = std::exp(2.0 * acc.s1.value() - acc.s2.value());
  e.degenerate_ess = e.ess < 10.0;
  return e;
}

WeightAccumulator merge_all(const std::vector<WeightAccumulator>& blocks) {
  WeightAccumulator acc;
  for (const auto& b : blocks) acc.merge(b);
  return acc;
}

}  // namespace

ProbabilityEstimate direct_probability(const EventSpec& event, double t, std::size_t n_paths,
                                       const ProbabilityLaw& phi, std::uint64_t seed) {
  if (n_paths == 0) throw std::invalid_argument("direct_probability: n_paths must be positive");
  const auto blocks = run_blocks<WeightAccumulator>(
      seed, n_paths, [&](Rng& rng, std::size_t begin, std::size_t end) {
        WeightAccumulator acc;
        for (std::size_t i = begin; i < end; ++i) {
          const Trajectory path = simulate_undelayed(t, phi, rng);
          ++acc.n;
          if (event(path, t)) acc.add_hit(0.0);
        }
        return acc;
      });
  return finish(merge_all(blocks));
}

ProbabilityEstimate importance_probability(const EventSpec& event, const TiltedScheme& scheme,
                                           std::size_t n_paths, const ProbabilityLaw& phi,
                                           std::uint64_t seed) {
  if (n_paths == 0) throw std::invalid_argument("importance_probability: n_paths must be positive");
  const TiltedSampler sampler(scheme, phi);
  const auto blocks = run_blocks<WeightAccumulator>(
      seed, n_paths, [&](Rng& rng, std::size_t begin, std::size_t end) {
        WeightAccumulator acc;
        for (std::size_t i = begin; i < end; ++i) {
          const TiltedPath tp = sampler.sample(rng);
          ++acc.n;
          if (event(tp.path, scheme.t)) acc.add_hit(tp.log_lr);
        }
        return acc;
      });
  return finish(merge_all(blocks));
}

CostCheck entropy_cost_check(const TiltedScheme& scheme, const ProbabilityLaw& phi,
                             std::size_t n_paths, std::uint64_t seed) {
  const TiltedSampler sampler(scheme, phi);
  const auto blocks =
      run_blocks<RunningStats>(seed, n_paths, [&](Rng& rng, std::size_t begin, std::size_t end) {
        RunningStats st;
        for (std::size_t i = begin; i < end; ++i) st.add(-sampler.sample(rng).log_lr);
        return st;
      });
  RunningStats all;
  for (const auto& b : blocks) all.merge(b);
  const double closed = entropy_cost(scheme, phi).to_double();
  const double se = all.standard_error();
  const double slack = 3.0 * se + 1e-9 * std::max(1.0, std::abs(closed));
  return {closed, all.mean(), se, std::abs(all.mean() - closed) <= slack};
}

SlopeEstimate fit_slope(std::vector<double> t, std::vector<double> log_prob,
                        std::vector<double> log_prob_se, std::string tag, double variance_floor) {
  if (t.size() != log_prob.size() || t.size() != log_prob_se.size()) {
    throw std::invalid_argument("fit_slope: size mismatch");
  }
  SlopeEstimate s;
  s.tag = std::move(tag);
  s.t_grid = t;
  s.log_prob = log_prob;
  s.log_prob_se = log_prob_se;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(log_prob[i])) continue;
    const double se = std::isfinite(log_prob_se[i]) ? log_prob_se[i] : 0.0;
    x.push_back(t[i]);
    y.push_back(log_prob[i]);
    w.push_back(1.0 / std::max(se * se, variance_floor));
  }
  if (x.size() < 2) throw std::invalid_argument("fit_slope: need two finite points");
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  s.slope = sxy / sxx;
  s.intercept = ym - s.slope * xm;
  const std::size_t dof = x.size() > 2 ? x.size() - 2 : 1;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (s.intercept + s.slope * x[i]);
    chi2 += w[i] * r * r;
  }
  const double inflate = x.size() > 2 ? std::max(1.0, std::sqrt(chi2 / static_cast<double>(dof))) : 1.0;
  s.slope_se = inflate / std::sqrt(sxx);
  const boost::math::students_t dist(static_cast<double>(dof));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  s.ci_lo = s.slope - q * s.slope_se;
  s.ci_hi = s.slope + q * s.slope_se;
  return s;
}

// ---- tightness and free energy ----

double log_tightness_bound(double m, double t, const ProbabilityLaw& phi) {
  if (!(m > 0.0 && t > 0.0)) throw std::invalid_argument("tightness_bound: M and t must be positive");
  const double log_e = log_expectation(phi, [](double v) { return -1.0 / v; });
  return t + std::floor(t * m) * log_e;
}

double tightness_bound(double m, double t, const ProbabilityLaw& phi) {
  return std::exp(log_tightness_bound(m, t, phi));
}

double mean_momentum(const Trajectory& path, double t) {
  const auto [s, n] = renewal_counts(path, t);
  return (static_cast<double>(n) + (t - s) / path.cycles()[n].tau) / t;
}

TightnessPoint tightness_check(double m, double t, const ProbabilityLaw& phi, std::size_t n_paths,
                               std::uint64_t seed) {
  TightnessPoint p{t, m, direct_probability(EventSpec::mean_momentum_exceeds(m), t, n_paths, phi, seed),
                   tightness_bound(m, t, phi), false};
  p.ok = p.mc.estimate <= p.bound;
  return p;
}

double path_integral(const TestFunctionFixture& f, const Trajectory& path, double t) {
  KahanSum total;
  double a = path.t0();
  for (const auto& c : path.cycles()) {
    if (a >= t) break;
    const double end = a + c.tau;
    const double q_end = end <= t ? 1.0 : (t - a) / c.tau;
    total.add(c.tau * f.antiderivative(q_end, c.speed));
    a = end;
  }
  return total.value();
}

std::vector<FreeEnergyPoint> free_energy_check(const TestFunctionFixture& f,
                                               const ProbabilityLaw& phi,
                                               const std::vector<double>& t_grid,
                                               std::size_t n_paths, std::uint64_t seed) {
  const double bound = f.free_energy_bound();
  std::vector<FreeEnergyPoint> out;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const auto blocks = run_blocks<RunningStats>(
        seed + 0x9e3779b97f4a7c15ULL * (k + 1), n_paths,
        [&](Rng& rng, std::size_t begin, std::size_t end) {
          RunningStats st;
          for (std::size_t i = begin; i < end; ++i) {
            st.add(std::exp(path_integral(f, simulate_undelayed(t, phi, rng), t)));
          }
          return st;
        });
    RunningStats all;
    for (const auto& b : blocks) all.merge(b);
    out.push_back({t, all.mean(), all.standard_error(), bound, all.mean() <= bound});
  }
  return out;
}

// ---- non-LDP experiment ----

std::pair<double, double> renewal_fractions(const Trajectory& path, double t) {
  const auto [s, n] = renewal_counts(path, t);
  return {s / t, (t - s) / path.cycles()[n].tau};
}

double log_decomposition_bound(const ProbabilityLaw& phi, double beta, double h, double t) {
  if (!(beta >= 0.0 && beta < 1.0 && h > 0.0 && t > 0.0)) {
    throw std::invalid_argument("log_decomposition_bound: need 0 <= beta < 1, h > 0, t > 0");
  }
  const FlatLaw flat = FlatLaw::of(phi);
  if (!flat.dens.empty() || flat.atoms.empty()) return kInf;
  if (phi.is_atomic() && phi.atomic_part().tail == TailDirection::toward_infinity) return kInf;
  const double max_speed = flat.atoms.rbegin()->first;
  const double big_tau = t * (1.0 - beta) / h;
  const double log_psi = log_mass(phi, 0.0, std::nextafter(1.0 / big_tau, kInf));
  const double renewals = std::floor(beta * t * max_speed);
  return log_psi + std::log1p(renewals);
}

ProbabilityEstimate decomposition_event_probability(const ProbabilityLaw& phi, double beta,
                                                    double h, double t, std::size_t n_paths,
                                                    std::uint64_t seed) {
  const auto event = EventSpec::custom(
      [beta, h](const Trajectory& path, double s) {
        const auto [frac, resid] = renewal_fractions(path, s);
        return frac <= beta && resid <= h;
      },
      "decomposition");
  return direct_probability(event, t, n_paths, phi, seed);
}

namespace {

ProbabilityLaw tilt_law_for(double alpha, const ProbabilityLaw& phi) {
  return alpha > 0.0 ? phi : ProbabilityLaw{};
}

double log_se_of(const ProbabilityEstimate& e) {
  if (e.log_estimate == kNegInf || e.log_stderr == kNegInf) return 0.0;
  return std::exp(e.log_stderr - e.log_estimate);
}

}  // namespace

NonLdpResult non_ldp_experiment(const NonLdpConfig& config, const ProbabilityLaw& phi,
                                const ExtendedReal& xi) {
  if (config.j_max <= config.j_min) throw std::invalid_argument("non_ldp_experiment: need j_max > j_min");
  NonLdpResult r;
  r.target_slope = xi.is_infinite() ? -kInf : -(1.0 - config.alpha) * xi.value() / config.ell;
  const auto event = EventSpec::bl_ball(non_ldp_center(config.alpha, config.ell, phi), config.ball_radius);
  const ProbabilityLaw pt = tilt_law_for(config.alpha, phi);

  std::vector<double> lp;
  std::vector<double> lse;
  for (int j = config.j_min; j <= config.j_max; ++j) {
    const double t = matched_time(config.alpha, config.ell, std::ldexp(1.0, -j));
    const auto scheme = TiltedScheme::make(config.alpha, pt, config.ell, config.delta, t);
    const auto est = importance_probability(event, scheme, config.n_paths, phi,
                                            config.seed * 1000003ULL + static_cast<std::uint64_t>(j));
    r.matched_times.push_back(t);
    r.matched.push_back(est);
    lp.push_back(est.log_estimate);
    lse.push_back(log_se_of(est));
  }
  r.matched_slope = fit_slope(r.matched_times, lp, lse, "importance");

  std::vector<double> s_grid;
  std::vector<double> is_lp;
  std::vector<double> is_lse;
  std::vector<double> bound_lp;
  bool all_nonempty = true;
  bool all_bounded = true;
  for (std::size_t k = 0; k + 1 < r.matched_times.size(); ++k) {
    const double s = std::sqrt(r.matched_times[k] * r.matched_times[k + 1]);
    MismatchedPoint m{s, false, std::nullopt, kInf};
    const auto scheme = TiltedScheme::make(config.alpha, pt, config.ell, config.delta, s);
    try {
      m.importance = importance_probability(event, scheme, config.n_paths, phi,
                                            config.seed * 1000003ULL + 500000ULL + k);
    } catch (const EmptyWindow&) {
      m.empty_window = true;
    }
    const double beta = config.alpha + config.delta1;
    const double h = config.ell + config.delta1;
    if (beta < 1.0) m.log_bound = log_decomposition_bound(phi, beta, h, s);
    s_grid.push_back(s);
    if (m.importance && m.importance->hits > 0) {
      is_lp.push_back(m.importance->log_estimate);
      is_lse.push_back(log_se_of(*m.importance));
    } else {
      all_nonempty = false;
    }
    if (std::isfinite(m.log_bound)) {
      bound_lp.push_back(m.log_bound);
    } else {
      all_bounded = false;
    }
    r.mismatched.push_back(std::move(m));
  }
  if (all_nonempty && s_grid.size() >= 2) {
    r.mismatched_is_slope = fit_slope(s_grid, is_lp, is_lse, "importance");
  }
  if (all_bounded && s_grid.size() >= 2) {
    r.mismatched_bound_slope =
        fit_slope(s_grid, bound_lp, std::vector<double>(s_grid.size(), 0.0), "bound");
  }
  return r;
}

Delta1Calibration calibrate_delta1(double alpha, double ell, double ball_radius,
                                   const ProbabilityLaw& phi, const std::vector<double>& t_grid,
                                   std::size_t n_paths, std::uint64_t seed) {
  const auto event = EventSpec::bl_ball(non_ldp_center(alpha, ell, phi), ball_radius);
  constexpr double kWindow = 0.02;
  Delta1Calibration cal{0.0, 0, 0};
  std::uint64_t stream = 0;
  for (double shift : {0.0, 0.02, 0.05, 0.1}) {
    const double a = alpha + shift;
    if (a + 2.0 * kWindow >= 1.0) continue;
    for (int k = -10; k <= 10; ++k) {
      const double l = ell + 0.02 * k;
      if (!(l > kWindow && l < 1.0 - kWindow)) continue;
      for (double t : t_grid) {
        const TiltedScheme scheme = a == 0.0
                                        ? TiltedScheme::slow_reentry(l, kWindow, t)
                                        : TiltedScheme::ll_plus_slow_reentry(a, phi, l, kWindow, t);
        std::optional<TiltedSampler> sampler;
        try {
          sampler.emplace(scheme, phi);
        } catch (const EmptyWindow&) {
          continue;
        }
        Rng rng(seed, stream++);
        for (std::size_t i = 0; i < n_paths; ++i) {
          const TiltedPath tp = sampler->sample(rng);
          ++cal.sampled;
          if (!event(tp.path, t)) continue;
          ++cal.inside;
          const auto [frac, resid] = renewal_fractions(tp.path, t);
          cal.delta1 = std::max({cal.delta1, std::abs(frac - alpha), std::abs(resid - ell)});
        }
      }
    }
  }
  return cal;
}

}  // namespace hotwall
