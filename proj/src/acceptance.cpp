#include "hotwall/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hotwall/empirical.hpp"
#include "hotwall/errors.hpp"
#include "hotwall/laws.hpp"
#include "hotwall/numeric.hpp"
#include "hotwall/process.hpp"
#include "hotwall/rare_event.hpp"
#include "hotwall/rate.hpp"

namespace hotwall {

namespace {

using Clock = std::chrono::steady_clock;

std::string yes(bool b) { return b ? "ok" : "FAIL"; }

// ---- 1: law of large numbers ----

void lln(CriterionResult& r, std::uint64_t seed) {
  const auto pi = ProbabilityLaw::atomic({{1.0, 0.4}, {3.0, 0.6}});
  const auto target = product_target(pi);
  const auto tilde = size_bias(pi);
  constexpr int kReplicas = 10;
  std::vector<double> means;
  for (double t : {1e2, 1e3, 1e4}) {
    const auto blocks = run_blocks<RunningStats>(
        seed, kReplicas,
        [&](Rng& rng, std::size_t begin, std::size_t end) {
          RunningStats st;
          for (std::size_t i = begin; i < end; ++i) {
            st.add(bl_distance(empirical_measure(simulate_undelayed(t, tilde, rng), t), target));
          }
          return st;
        },
        1);
    RunningStats all;
    for (const auto& b : blocks) all.merge(b);
    means.push_back(all.mean());
    r.details.push_back(fmt::format("t={:g}: mean bl over {} paths = {:.6g} (se {:.2g})", t,
                                    kReplicas, all.mean(), all.standard_error()));
  }
  const bool monotone = means[0] > means[1] && means[1] > means[2];
  const bool small = means[2] <= 0.02;
  r.checks_passed = monotone && small;
  r.summary = fmt::format("bl at t=1e2,1e3,1e4: {:.4f}, {:.4f}, {:.4f}; decreasing {}; final <= 0.02 {}",
                          means[0], means[1], means[2], yes(monotone), yes(small));
}

// ---- 2: delayed versus undelayed total variation ----

void tv_bound(CriterionResult& r, std::uint64_t seed) {
  Rng rng(seed, 2);
  int violations = 0;
  Rational worst(1);
  for (int k = 0; k < 100; ++k) {
    const double q0 = rng.uniform() * 0.999;
    const double p0 = 0.2 + 4.8 * rng.uniform();
    ProbabilityLaw phi;
    switch (static_cast<int>(rng.uniform() * 3.0)) {
      case 0: phi = ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}}); break;
      case 1: phi = ProbabilityLaw::exp_interarrival(1.0); break;
      default: phi = ProbabilityLaw::atomic({{0.25, 0.2}, {1.0, 0.3}, {3.0, 0.5}}); break;
    }
    const double t = (1.0 - q0) / p0 + 0.01 + 30.0 * rng.uniform();
    const Trajectory path = simulate(q0, p0, t + 1.0, phi, rng);
    const Rational rt(t);
    const Rational t0 = exact_t0(path);
    const auto mu = exact_empirical_measure(path, rt, true);
    const auto bar = exact_empirical_measure(path, rt - t0, false);
    const Rational norm = 2 * tv_distance(mu, bar);
    const Rational bound = 2 * t0 / rt;
    if (norm > bound) ++violations;
    worst = std::min(worst, Rational(bound - norm));
  }
  r.checks_passed = violations == 0;
  r.summary = fmt::format("100 configurations, exact arithmetic: {} violations of 2 tv <= 2 T0/t, "
                          "smallest slack {:.3g}",
                          violations, static_cast<double>(worst));
}

// ---- 3: dyadic law ----

void dyadic_law(CriterionResult& r) {
  const auto dy = ProbabilityLaw::dyadic();
  const ExtendedReal xi = compute_xi(dy);
  const bool xi_ok = xi.is_finite() && std::abs(xi.value() - 1.0) <= 1e-6;
  int nonzero = 0;
  int nonzero_narrow = 0;
  for (int j = 3; j <= 12; ++j) {
    const double eps = 3.0 * std::ldexp(1.0, -j);
    const double lw = log_window_probability(dy, eps, 0.4);
    if (lw != kNegInf) {
      ++nonzero;
      r.details.push_back(fmt::format("j={}: window [1.8, 4.2) 2^-j has log mass {:.17g} "
                                      "(atoms 2^(1-j), 2^(2-j))",
                                      j, lw));
    }
    if (window_probability(dy, eps, 0.3) != 0.0) ++nonzero_narrow;
  }
  r.details.push_back(fmt::format("diagnostic: delta=0.3 windows nonzero for {} of 10 j", nonzero_narrow));
  r.checks_passed = xi_ok && nonzero == 0;
  r.summary = fmt::format("xi={:.9g} ({}); delta=0.4 windows nonzero for {} of 10 j ({}); "
                          "delta=0.3 diagnostic: {} nonzero",
                          xi.to_double(), yes(xi_ok), nonzero, yes(nonzero == 0), nonzero_narrow);
}

// ---- 4: exponential interarrivals ----

void exp_law(CriterionResult& r) {
  bool ok = true;
  std::string s;
  for (double x0 : {0.5, 1.0, 2.0}) {
    const auto law = ProbabilityLaw::exp_interarrival(x0);
    const ExtendedReal xi = compute_xi(law);
    const auto rep = estimate_xi_bar(law);
    const bool xi_ok = xi.is_finite() && std::abs(xi.value() - x0) <= 1e-3;
    const bool finite = rep.xi_bar_lower.is_finite() && rep.xi_bar_upper.is_finite();
    const double lo = rep.xi_bar_lower.to_double();
    const double hi = rep.xi_bar_upper.to_double();
    const bool bracket_ok = finite && lo <= x0 && x0 <= hi && hi - lo <= 0.2;
    ok = ok && xi_ok && bracket_ok;
    s += fmt::format("{}xi0={:g}: xi={:.7g}, xi_bar in [{:.5g}, {:.5g}]", s.empty() ? "" : "; ", x0,
                     xi.to_double(), lo, hi);
    r.details.push_back(fmt::format("xi0={:g}: |xi - xi0| <= 1e-3 {}; bracket contains xi0 with "
                                    "width <= 0.2 {}",
                                    x0, yes(xi_ok), yes(bracket_ok)));
  }
  r.checks_passed = ok;
  r.summary = s;
}

// ---- 5: rate identities ----

void rate_identities(CriterionResult& r) {
  const auto phi = ProbabilityLaw::atomic({{1.0, 0.5}, {2.0, 0.5}});
  const auto pi = ProbabilityLaw::atomic({{1.0, 0.2}, {2.0, 0.8}});
  const std::vector<std::pair<ExtendedReal, ExtendedReal>> xis{
      {1.0, 1.0}, {1.0, ExtendedReal::infinity()}, {0.5, 2.0}, {0.0, 0.3}, {2.5, 7.0}};
  int points = 0;
  int identity_fail = 0;
  int order_fail = 0;
  for (double a1 : {0.0, 0.25, 0.5, 0.75}) {
    for (double share : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double a3 = (1.0 - a1) * share;
      const double a2 = 1.0 - a1 - a3;
      for (int k = 0; k < 10; ++k) {
        const double ell = 0.1 * k;
        const auto mu = OmegaMeasure::make(a1, pi, a2, a3, ell, phi);
        const ExtendedReal ent = entropy_part(mu, phi);
        for (const auto& [xi, xib] : xis) {
          ++points;
          const auto i = rate_I_exact(mu, ent, xi);
          const auto ib = rate_I_bar_exact(mu, ent, xi, xib);
          if (!(ib.total >= i.total)) ++order_fail;
          const auto gap = rate_gap_exact(mu, xi, xib);
          const bool ok = i.total.is_finite() ? (ib.total - i.total == gap)
                                              : ib.total.is_infinite();
          if (!ok) ++identity_fail;
        }
      }
    }
  }
  double worst_invariant = 0.0;
  for (const auto& law : {phi, ProbabilityLaw::atomic({{0.25, 0.2}, {1.0, 0.3}, {3.0, 0.5}}),
                          ProbabilityLaw::dyadic()}) {
    const auto v = rate_I(invariant_measure(law), law, compute_xi(law)).total;
    worst_invariant = std::max(worst_invariant, v.to_double());
  }
  const bool inv_ok = worst_invariant <= 1e-12;
  r.checks_passed = identity_fail == 0 && order_fail == 0 && inv_ok && points == 1000;
  r.summary = fmt::format("{} grid points: gap identity failures {}, I-bar < I cases {}; "
                          "max I(invariant) over 3 laws = {:.3g}",
                          points, identity_fail, order_fail, worst_invariant);
}

// ---- 6: variational formula ----

Candidate random_candidate(Rng& rng) {
  std::vector<double> x;
  std::vector<double> y;
  for (int k = 0; k < 6; ++k) {
    x.push_back(-4.0 + 1.6 * k);
    y.push_back(6.0 * rng.uniform() - 3.0);
  }
  return piecewise_log_linear(x, y);
}

ProbabilityLaw random_on(const std::vector<double>& support, Rng& rng) {
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (double s : support) {
    const double w = 0.05 + rng.uniform();
    atoms.emplace_back(s, w);
    total += w;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    atoms[i].second /= total;
    acc += atoms[i].second;
  }
  atoms.back().second = 1.0 - acc;
  return ProbabilityLaw::atomic(atoms);
}

void variational(CriterionResult& r, std::uint64_t seed) {
  Rng rng(seed, 6);
  const std::vector<double> support{0.25, 0.5, 1.0, 3.0};
  double worst_gap = 0.0;
  int exceed = 0;
  int trials = 0;
  for (int k = 0; k < 20; ++k) {
    const auto phi = random_on(support, rng);
    const auto pi = random_on({0.25, 1.0, 3.0}, rng);
    const double closed = (mean(pi) * relative_entropy(size_bias(pi), phi)).value();
    const double v = variational_entropy(pi, phi, {optimal_candidate(pi, phi)}).value;
    worst_gap = std::max(worst_gap, std::abs(v - closed));
    for (int t = 0; t < 500; ++t) {
      ++trials;
      if (variational_entropy(pi, phi, {random_candidate(rng)}).value > closed) ++exceed;
    }
  }
  r.checks_passed = worst_gap <= 1e-9 && exceed == 0;
  r.summary = fmt::format("20 pairs: max |sup - pi(p) H| = {:.3g} with the optimizer; "
                          "{} of {} random-candidate trials exceed the closed form",
                          worst_gap, exceed, trials);
}

// ---- 7: tightness and free energy ----

struct FixtureSpec {
  std::string name;
  double c;
  double delta;  // 0: suitable_delta
  BoundedFunction g;
  double m;
};

std::vector<FixtureSpec> fixture_specs() {
  return {
      {"c=0, g=log 1/2", 0.0, 0.5, {[](double) { return std::log(0.5); }, std::log(0.5)}, 0.5},
      {"c=0.5, g=log 1/2", 0.5, 0.0, {[](double) { return std::log(0.5); }, std::log(0.5)}, 0.5},
      {"c=0.3, g=-1-p/(2(1+p))", 0.3, 0.0,
       {[](double p) { return -1.0 - 0.5 * p / (1.0 + p); }, -1.0}, 0.25},
      {"c=0.8, g=log 1/10", 0.8, 0.0, {[](double) { return std::log(0.1); }, std::log(0.1)}, 0.2},
      {"c=0, g=-0.8+0.1 sin p", 0.0, 0.5,
       {[](double p) { return -0.8 + 0.1 * std::sin(p); }, -0.7}, 0.5},
  };
}

void tightness_free_energy(CriterionResult& r, std::uint64_t seed) {
  int violations = 0;
  int checks = 0;
  const auto law = ProbabilityLaw::atomic({{0.5, 0.5}, {4.0, 0.5}});
  for (double t : {10.0, 20.0}) {
    for (double m : {2.0, 5.0}) {
      const auto p = tightness_check(m, t, law, 100000, seed + static_cast<std::uint64_t>(t * 10 + m));
      ++checks;
      if (!p.ok) ++violations;
      r.details.push_back(fmt::format("tightness t={:g} M={:g}: mc {:.4g} (se {:.2g}, hits {}) <= bound {:.4g} {}",
                                      t, m, p.mc.estimate, p.mc.stderr_, p.mc.hits, p.bound, yes(p.ok)));
    }
  }
  const auto dy = ProbabilityLaw::dyadic();
  const ExtendedReal xi = 1.0;
  std::uint64_t stream = 0;
  for (const auto& spec : fixture_specs()) {
    const double delta = spec.delta > 0.0 ? spec.delta : suitable_delta(spec.c, spec.g, dy);
    try {
      const auto f = test_function_fixture(spec.c, delta, spec.g, spec.m, dy, xi);
      for (const auto& p : free_energy_check(f, dy, {10.0, 50.0, 100.0}, 20000, seed * 31 + stream++)) {
        ++checks;
        if (!p.ok) ++violations;
        r.details.push_back(fmt::format("free energy [{}] delta={:g} C_f={:.4g} D_f={:.4g}: t={:g} "
                                        "mean {:.4g} (se {:.2g}) <= bound {:.4g} {}",
                                        spec.name, delta, f.c_f, f.d_f, p.t, p.mc_mean, p.mc_stderr,
                                        p.bound, yes(p.ok)));
      }
    } catch (const NotInLambda& e) {
      ++violations;
      r.details.push_back(fmt::format("fixture [{}] not certified: {}", spec.name, e.what()));
    }
  }
  r.checks_passed = violations == 0 && checks == 4 + 15;
  r.summary = fmt::format("{} checks (4 tightness, 15 free energy), {} violations", checks, violations);
}

// ---- 8: non-LDP demonstration ----

void non_ldp(CriterionResult& r, std::uint64_t seed) {
  const auto dy = ProbabilityLaw::dyadic();
  const auto ex = ProbabilityLaw::exp_interarrival(1.0);
  NonLdpConfig cfg;
  cfg.seed = seed;
  const auto cal = calibrate_delta1(cfg.alpha, cfg.ell, cfg.ball_radius, ex, {64.0, 256.0, 1024.0}, 500, seed);
  cfg.delta1 = 1.2 * cal.delta1;
  r.details.push_back(fmt::format("delta1 calibrated on exp-interarrival(1): {:.4g} ({} of {} paths in "
                                  "the ball); used {:.4g}",
                                  cal.delta1, cal.inside, cal.sampled, cfg.delta1));
  const auto res = non_ldp_experiment(cfg, dy, compute_xi(dy));
  const double ms = res.matched_slope.slope;
  const bool matched_ok = std::abs(ms - (-2.0)) <= 0.2 * 2.0;
  bool all_empty = true;
  for (const auto& m : res.mismatched) all_empty = all_empty && m.empty_window;
  const bool bound_ok = res.mismatched_bound_slope.has_value() &&
                        res.mismatched_bound_slope->slope <= ms - 0.5;
  const double bs = res.mismatched_bound_slope ? res.mismatched_bound_slope->slope : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < res.matched.size(); ++i) {
    r.details.push_back(fmt::format("matched t={:g}: log P = {:.10g} (hits {}/{})", res.matched_times[i],
                                    res.matched[i].log_estimate, res.matched[i].hits, res.matched[i].n));
  }
  for (const auto& m : res.mismatched) {
    r.details.push_back(fmt::format("mismatched s={:.6g}: window empty {}, log bound {:.10g}", m.s,
                                    m.empty_window ? "yes" : "no", m.log_bound));
  }
  const auto ctl = non_ldp_experiment(cfg, ex, ExtendedReal(1.0));
  bool control_ok = false;
  std::string ctl_text = "control mismatched slope unavailable";
  if (ctl.mismatched_is_slope) {
    const auto& a = ctl.matched_slope;
    const auto& b = *ctl.mismatched_is_slope;
    control_ok = a.ci_lo <= b.ci_hi && b.ci_lo <= a.ci_hi;
    ctl_text = fmt::format("control slopes {:.6f} [{:.6f}, {:.6f}] vs {:.6f} [{:.6f}, {:.6f}]", a.slope,
                           a.ci_lo, a.ci_hi, b.slope, b.ci_lo, b.ci_hi);
  }
  r.details.push_back(ctl_text);
  r.checks_passed = matched_ok && all_empty && bound_ok && control_ok;
  r.summary = fmt::format("matched slope {:.6f} (target -2, {}); mismatched windows empty {}; bound "
                          "slope {:.4f}, margin {:.3f} ({}); control overlap {}",
                          ms, yes(matched_ok), yes(all_empty), bs, ms - bs, yes(bound_ok), yes(control_ok));
}

// ---- 9: entropy cost ----

void entropy_costs(CriterionResult& r, std::uint64_t seed) {
  Rng rng(seed, 9);
  int failures = 0;
  int schemes = 0;
  const double xi0s[] = {0.5, 1.0, 2.0};
  for (int k = 0; k < 10; ++k) {
    const double x0 = xi0s[k % 3];
    const auto phi = ProbabilityLaw::exp_interarrival(x0);
    const auto tilde = ProbabilityLaw::exp_interarrival(x0 * (1.2 + 0.1 * k));
    const double alpha = 0.2 * (k % 3);
    const double ell = 0.2 + 0.3 * rng.uniform();  // K_t is nonempty only for ell < 1 - alpha
    const double t = 10.0 + 30.0 * rng.uniform();
    const auto scheme = TiltedScheme::make(alpha, tilde, ell, 0.05, t);
    const auto c = entropy_cost_check(scheme, phi, 2000, seed * 101 + static_cast<std::uint64_t>(k));
    ++schemes;
    if (!c.within_3sigma) ++failures;
    r.details.push_back(fmt::format("{} on exp({:g}): closed {:.8g}, mc {:.8g} (se {:.2g}) {}",
                                    scheme.describe(), x0, c.closed_form, c.mc_mean, c.mc_stderr,
                                    yes(c.within_3sigma)));
  }
  const auto dy = ProbabilityLaw::dyadic();
  for (int k = 0; k < 10; ++k) {
    std::vector<double> support{1.0, 0.5, 0.25};
    const auto tilde = random_on(support, rng);
    const double alpha = 0.15 * (k % 4);
    const double ell = 0.2 + 0.3 * rng.uniform();  // K_t is nonempty only for ell < 1 - alpha
    const int j = 5 + k % 4;
    const double t = matched_time(alpha, ell, std::ldexp(1.0, -j));
    const auto scheme = TiltedScheme::make(alpha, tilde, ell, 0.05, t);
    const auto c = entropy_cost_check(scheme, dy, 2000, seed * 103 + static_cast<std::uint64_t>(k));
    ++schemes;
    if (!c.within_3sigma) ++failures;
    r.details.push_back(fmt::format("{} on dyadic: closed {:.8g}, mc {:.8g} (se {:.2g}) {}",
                                    scheme.describe(), c.closed_form, c.mc_mean, c.mc_stderr,
                                    yes(c.within_3sigma)));
  }
  // Convergence of cost/t to I-bar along growing t for a law with xi = xi_bar = 1.
  const auto phi = ProbabilityLaw::exp_interarrival(1.0);
  const auto tilde = ProbabilityLaw::exp_interarrival(1.5);
  const double alpha = 0.5;
  const double ell = 0.4;
  const auto pi = size_bias_inverse(tilde);
  const auto mu = OmegaMeasure::make(alpha, pi, 0.0, 1.0 - alpha, ell, phi);
  const double target = rate_I_bar(mu, phi, 1.0, 1.0).total.to_double();
  double last = 0.0;
  for (double t : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    const auto scheme = TiltedScheme::make(alpha, tilde, ell, 0.01, t);
    last = entropy_cost(scheme, phi).to_double() / t;
    r.details.push_back(fmt::format("cost/t at t={:g}: {:.8g} (I-bar target {:.8g})", t, last, target));
  }
  const double rel = std::abs(last - target) / target;
  r.checks_passed = failures == 0 && schemes == 20 && rel <= 0.1;
  r.summary = fmt::format("{} schemes, {} outside 3 sigma; cost/t at t=800 = {:.6g} vs I-bar {:.6g} "
                          "(rel. error {:.3g})",
                          schemes, failures, last, target, rel);
}

// ---- 10: semigroup and generator ----

void markov(CriterionResult& r, std::uint64_t seed) {
  const double two_pi = 2.0 * std::numbers::pi;
  const std::vector<TestFunction> fns{
      {"sin(2 pi q)", [=](double q, double) { return std::sin(two_pi * q); },
       [=](double q, double) { return two_pi * std::cos(two_pi * q); }},
      {"cos(2 pi q)", [=](double q, double) { return std::cos(two_pi * q); },
       [=](double q, double) { return -two_pi * std::sin(two_pi * q); }},
      {"q(1-q)", [](double q, double) { return q * (1.0 - q); },
       [](double q, double) { return 1.0 - 2.0 * q; }},
      {"sin(2 pi q) p/(1+p)", [=](double q, double p) { return std::sin(two_pi * q) * p / (1.0 + p); },
       [=](double q, double p) { return two_pi * std::cos(two_pi * q) * p / (1.0 + p); }},
      {"sin^2(pi q) e^-p",
       [](double q, double p) {
         const double s = std::sin(std::numbers::pi * q);
         return s * s * std::exp(-p);
       },
       [=](double q, double p) { return std::numbers::pi * std::sin(two_pi * q) * std::exp(-p); }},
  };
  const std::vector<std::pair<std::string, ProbabilityLaw>> laws{
      {"two atoms", ProbabilityLaw::atomic({{0.5, 0.5}, {2.0, 0.5}})},
      {"exp(1)", ProbabilityLaw::exp_interarrival(1.0)}};
  constexpr double kQuadTol = 1e-9;
  constexpr std::size_t kSamples = 20000;
  int checks = 0;
  int failures = 0;
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (const auto& [lname, law] : laws) {
    for (const auto& f : fns) {
      for (double t : {0.5, 1.0, 2.0}) {
        for (double s : {0.5, 1.0, 2.0}) {
          const auto res = semigroup_residual(f, t, s, kSamples, law, seed * 7 + stream++);
          ++checks;
          const double ratio = res.residual / (5.0 * res.stderr_ + kQuadTol);
          worst = std::max(worst, ratio);
          if (ratio >= 1.0) {
            ++failures;
            r.details.push_back(fmt::format("semigroup {} on {} t={:g} s={:g}: residual {:.3g}, se {:.3g}",
                                            f.name, lname, t, s, res.residual, res.stderr_));
          }
        }
        const auto g = generator_residual(f, t, kSamples, law, seed * 7 + stream++);
        ++checks;
        const double ratio = g.residual / (5.0 * g.stderr_ + kQuadTol);
        worst = std::max(worst, ratio);
        if (ratio >= 1.0) {
          ++failures;
          r.details.push_back(fmt::format("generator {} on {} t={:g}: residual {:.3g}, se {:.3g}", f.name,
                                          lname, t, g.residual, g.stderr_));
        }
      }
    }
  }
  r.checks_passed = failures == 0;
  r.summary = fmt::format("{} residuals (90 semigroup, 30 generator), {} above 5 se + tol; "
                          "max residual/(5 se + tol) = {:.3f}",
                          checks, failures, worst);
}

struct Spec {
  const char* title;
  double budget;
};

constexpr Spec kSpecs[] = {
    {"law of large numbers", 10.0},
    {"delayed vs undelayed tv bound", 5.0},
    {"dyadic law xi and empty windows", 1.0},
    {"exp-interarrival xi and xi_bar", 30.0},
    {"rate identities", 1.0},
    {"variational formula", 10.0},
    {"tightness and free energy", 120.0},
    {"non-LDP demonstration", 600.0},
    {"entropy-cost consistency", 120.0},
    {"semigroup and generator", 60.0},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  if (id < 1 || id > 10) throw std::invalid_argument("criterion id must be in 1..10");
  CriterionResult r;
  r.id = id;
  r.title = kSpecs[id - 1].title;
  r.budget_seconds = kSpecs[id - 1].budget;
  const auto seed = options.seed;
  const auto start = Clock::now();
  try {
    switch (id) {
      case 1: lln(r, seed); break;
      case 2: tv_bound(r, seed); break;
      case 3: dyadic_law(r); break;
      case 4: exp_law(r); break;
      case 5: rate_identities(r); break;
      case 6: variational(r, seed); break;
      case 7: tightness_free_energy(r, seed); break;
      case 8: non_ldp(r, seed); break;
      case 9: entropy_costs(r, seed); break;
      default: markov(r, seed); break;
    }
  } catch (const std::exception& e) {
    r.checks_passed = false;
    r.summary = fmt::format("error: {}", e.what());
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = options.only;
  if (ids.empty()) {
    for (int i = 1; i <= 10; ++i) ids.push_back(i);
  }
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt::format("[{}] {:>2} {}: {} ({:.2f} s / {:g} s)", r.passed() ? "PASS" : "FAIL", r.id, r.title,
                     r.summary, r.seconds, r.budget_seconds);
}

}  // namespace hotwall
